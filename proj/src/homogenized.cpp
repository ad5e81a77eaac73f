#include "ptw/homogenized.hpp"
#include "ptw/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace ptw {

HomogenizedSystem build_homogenized(const MatXd& J_MN, const std::vector<MatXd>& J_F, double cond_max)
{
    const long k = J_MN.rows();
    require(J_MN.cols() == k, "J_MN must be square");
    require(!J_F.empty(), "need one flux Jacobian per direction");
    const int d = static_cast<int>(J_F.size());
    for (const auto& j : J_F)
        require(j.rows() == k && j.cols() == k, "flux Jacobians must match J_MN");
    require(k > d, "Jacobian size must be n + d with n >= 1");

    HomogenizedSystem hs;
    hs.d = d;
    hs.n = static_cast<int>(k) - d;
    hs.J_MN = J_MN;
    hs.J_F = J_F;
    Eigen::JacobiSVD<MatXd> svd(J_MN);
    const VecXd& sv = svd.singularValues();
    hs.cond = sv(k - 1) > 0 ? sv(0) / sv(k - 1) : std::numeric_limits<double>::infinity();
    if (!(hs.cond < cond_max))
        fail(ErrorKind::Nondegeneracy, "d(M, Omega N)/du is singular (condition " + std::to_string(hs.cond) + ")");
    return hs;
}

HomogenizedSystem build_homogenized(const ManifoldJacobians& jac, double cond_max)
{
    return build_homogenized(jac.J_MN, jac.J_F, cond_max);
}

MatXd build_A(const HomogenizedSystem& hs, const VecXd& xi)
{
    require(xi.size() == hs.d, "frequency has the wrong dimension");
    MatXd S = MatXd::Zero(hs.n + hs.d, hs.n + hs.d);
    for (int j = 0; j < hs.d; ++j)
        S += xi(j) * hs.J_F[j];
    return hs.J_MN.partialPivLu().solve(S);
}

CharacteristicSpeeds speeds(const HomogenizedSystem& hs, const VecXd& xi_hat, double zero_tol_rel)
{
    require(xi_hat.size() == hs.d, "direction has the wrong dimension");
    require(std::abs(xi_hat.norm() - 1) < 1e-12, "direction must be a unit vector");
    const int n = hs.n, d = hs.d, k = n + d;
    MatXd A = build_A(hs, xi_hat);
    Eigen::EigenSolver<MatXd> es(A, false);
    VecXc ev = es.eigenvalues();
    double rho = ev.cwiseAbs().maxCoeff();
    double ztol = zero_tol_rel * std::max(rho, 1e-300);

    std::vector<int> zero, nonzero;
    for (int i = 0; i < k; ++i)
        (std::abs(ev(i)) <= ztol ? zero : nonzero).push_back(i);
    const int z = static_cast<int>(zero.size());

    // kernel of A carries the zero modes (semisimple); count those violating the curl constraint
    int spurious = 0;
    if (z > 0 && d > 1) {
        Eigen::JacobiSVD<MatXd> svd(A, Eigen::ComputeFullV);
        MatXd V = svd.matrixV().rightCols(z);
        MatXd dk = (hs.J_MN * V).bottomRows(d);
        MatXd Pperp = MatXd::Identity(d, d) - xi_hat * xi_hat.transpose();
        MatXd K = Pperp * dk;
        Eigen::JacobiSVD<MatXd> sk(K);
        double top = std::max(sk.singularValues()(0), 1e-300);
        for (long i = 0; i < sk.singularValues().size(); ++i)
            if (sk.singularValues()(i) > 1e-6 * std::max(top, dk.norm()))
                ++spurious;
    }
    if (spurious != d - 1)
        fail(ErrorKind::ConstraintCount, "expected " + std::to_string(d - 1) + " spurious zero modes, found "
                                             + std::to_string(spurious) + " (zero cluster " + std::to_string(z) + ")");

    CharacteristicSpeeds cs;
    cs.xi_hat = xi_hat;
    cs.all_eigenvalues = ev;
    cs.zero_cluster = z;
    cs.zero_modes_removed = spurious;
    std::vector<cplx> kept;
    for (int i : nonzero)
        kept.push_back(ev(i));
    for (int i = 0; i < z - spurious; ++i)
        kept.push_back(0.0);
    std::sort(kept.begin(), kept.end(), [](cplx a, cplx b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    cs.speeds = Eigen::Map<VecXc>(kept.data(), static_cast<long>(kept.size()));
    return cs;
}

HyperbolicityReport check_weak_hyperbolicity(const HomogenizedSystem& hs, const std::vector<VecXd>& directions,
                                             double tol_rel)
{
    require(!directions.empty(), "need at least one direction");
    HyperbolicityReport rep;
    rep.pass = true;
    rep.distinct = true;
    rep.min_gap = std::numeric_limits<double>::infinity();
    for (const auto& xh : directions) {
        CharacteristicSpeeds cs = speeds(hs, xh);
        double rho = std::max(cs.all_eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
        double wi = cs.speeds.imag().cwiseAbs().maxCoeff();
        if (wi / rho > rep.worst_imag) {
            rep.worst_imag = wi / rho;
            rep.worst_direction = xh;
        }
        if (wi > tol_rel * rho)
            rep.pass = false;
        for (long i = 0; i + 1 < cs.speeds.size(); ++i)
            for (long j = i + 1; j < cs.speeds.size(); ++j) {
                double g = std::abs(cs.speeds(i) - cs.speeds(j)) / rho;
                rep.min_gap = std::min(rep.min_gap, g);
                if (g < 1e-6)
                    rep.distinct = false;
            }
    }
    if (rep.worst_direction.size() == 0)
        rep.worst_direction = directions.front();
    return rep;
}

std::vector<VecXd> sphere_grid(int d, int count)
{
    std::vector<VecXd> out;
    if (d == 1) {
        out.push_back(VecXd::Constant(1, 1.0));
        out.push_back(VecXd::Constant(1, -1.0));
        return out;
    }
    for (int i = 0; i < count; ++i) {
        VecXd v = VecXd::Zero(d);
        if (d == 2) {
            double th = 2 * pi * (i + 0.5) / count;
            v << std::cos(th), std::sin(th);
        } else {
            double z = 1.0 - 2.0 * (i + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1 - z * z));
            double ph = i * pi * (3.0 - std::sqrt(5.0));
            v(0) = z;
            v(1) = r * std::cos(ph);
            v(2) = r * std::sin(ph);
        }
        out.push_back(v.normalized());
    }
    return out;
}

cplx hat_delta(const HomogenizedSystem& hs, const VecXd& xi, cplx lambda)
{
    require(xi.size() == hs.d, "frequency has the wrong dimension");
    MatXc M = lambda * hs.J_MN.cast<cplx>();
    for (int j = 0; j < hs.d; ++j)
        M += I * xi(j) * hs.J_F[j].cast<cplx>();
    return M.determinant();
}

VecXc delta_coefficients(const HomogenizedSystem& hs, const VecXd& xi)
{
    const int k = hs.n + hs.d;
    const int N = k + 1;
    // scale of the roots: spectral radius of A(xi), at least tiny positive
    MatXd A = build_A(hs, xi);
    double rho = A.norm();
    if (rho == 0)
        rho = 1;
    VecXc vals(N);
    for (int l = 0; l < N; ++l)
        vals(l) = hat_delta(hs, xi, rho * std::polar(1.0, 2 * pi * l / N));
    VecXc c(N);
    for (int p = 0; p < N; ++p) {
        cplx acc = 0;
        for (int l = 0; l < N; ++l)
            acc += vals(l) * std::polar(1.0, -2 * pi * double(p) * l / N);
        c(p) = acc / double(N) / std::pow(rho, p);
    }
    // c(p) rho^p are the scaled coefficients; the first d-1 must vanish
    double big = 0;
    for (int p = 0; p < N; ++p)
        big = std::max(big, std::abs(c(p)) * std::pow(rho, p));
    for (int p = 0; p < hs.d - 1; ++p)
        if (std::abs(c(p)) * std::pow(rho, p) > 1e-8 * big)
            fail(ErrorKind::ConstraintCount, "hat-Delta lacks the expected lambda^{d-1} factor");
    return c.tail(N - (hs.d - 1));
}

cplx delta(const HomogenizedSystem& hs, const VecXd& xi, cplx lambda)
{
    if (hs.d == 1)
        return hat_delta(hs, xi, lambda);
    if (xi.norm() == 0)
        return std::pow(lambda, hs.n + 1) * hs.J_MN.determinant();
    VecXc c = delta_coefficients(hs, xi);
    cplx acc = 0;
    for (long p = c.size() - 1; p >= 0; --p)
        acc = acc * lambda + c(p);
    return acc;
}

VecXc delta_roots(const HomogenizedSystem& hs, const VecXd& xi)
{
    VecXc c = delta_coefficients(hs, xi);
    const long deg = c.size() - 1;
    require(std::abs(c(deg)) > 0, "leading coefficient vanishes");
    MatXc C = MatXc::Zero(deg, deg);
    for (long i = 1; i < deg; ++i)
        C(i, i - 1) = 1;
    for (long i = 0; i < deg; ++i)
        C(i, deg - 1) = -c(i) / c(deg);
    Eigen::ComplexEigenSolver<MatXc> es(C, false);
    return es.eigenvalues();
}

} // namespace ptw
