#include "ptw/bloch.hpp"
#include "ptw/errors.hpp"
#include "ptw/fourier.hpp"
#include "ptw/parallel.hpp"

#include <unsupported/Eigen/FFT>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptw {

PointCoefficients linearized_coefficients(const ModelSpec& model, const VecXd& u, const VecXd& up, double s)
{
    const int n = model.n, d = model.d;
    PointCoefficients pc;
    pc.B.reserve(d * d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            pc.B.push_back(model.B(j, k, u));
    for (int j = 0; j < d; ++j) {
        MatXd A = model.Df(j, u);
        if (!model.constant_viscosity)
            for (int c = 0; c < n; ++c)
                A.col(c) -= model.DB(j, 0, u, VecXd::Unit(n, c)) * up;
        if (j == 0)
            A.diagonal().array() -= s;
        pc.A.push_back(A);
    }
    return pc;
}

namespace {

// fraction of spectral energy at |k| >= m/2 for samples taken on more points
double energy_above(const MatXd& samples, int m)
{
    const long mw = samples.rows();
    if (mw <= m)
        return 0;
    Eigen::FFT<double> f;
    VecXc in(mw), hat;
    double worst = 0;
    for (long c = 0; c < samples.cols(); ++c) {
        in = samples.col(c).cast<cplx>();
        f.fwd(hat, in);
        double tot = hat.squaredNorm() - std::norm(hat(0));
        if (tot <= 0)
            continue;
        double hi = 0;
        for (long k = 0; k < mw; ++k) {
            long kk = k <= mw / 2 ? k : mw - k;
            if (kk >= m / 2)
                hi += std::norm(hat(k));
        }
        worst = std::max(worst, hi / tot);
    }
    return worst;
}

MatXd block_diag(const std::vector<MatXd>& pts, int n, int m)
{
    MatXd out = MatXd::Zero(n * m, n * m);
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                out(r * m + i, c * m + i) = pts[i](r, c);
    return out;
}

} // namespace

BlochAssembler::BlochAssembler(const ModelSpec& model, const WavePoint& wave, int m)
    : m_(m), n_(model.n), d_(model.d), X_(wave.X)
{
    require(is_power_of_two(m) && m >= 8, "collocation size must be a power of two >= 8");
    require(wave.n == model.n && wave.d == model.d, "wave does not belong to this model");
    if (wave.nu.size() != d_ || std::abs(wave.nu(0) - 1) > 1e-12)
        fail(ErrorKind::NotApplicable, "Bloch operators are assembled for waves travelling along x1 (nu = e1)");
    double lost = energy_above(wave.samples, m);
    if (lost > 1e-20)
        warnings_.push_back("collocation size " + std::to_string(m)
                            + " is below the profile bandwidth; aliasing energy fraction " + std::to_string(lost));
    u_ = resample(wave.samples, m);
    MatXd up = spectral_derivative(u_, X_);

    std::vector<std::vector<MatXd>> B(d_ * d_, std::vector<MatXd>(m));
    std::vector<std::vector<MatXd>> A(d_, std::vector<MatXd>(m));
    for (int i = 0; i < m; ++i) {
        PointCoefficients pc = linearized_coefficients(model, u_.row(i).transpose(), up.row(i).transpose(), wave.s);
        for (int jk = 0; jk < d_ * d_; ++jk)
            B[jk][i] = pc.B[jk];
        for (int j = 0; j < d_; ++j)
            A[j][i] = pc.A[j];
    }
    for (int jk = 0; jk < d_ * d_; ++jk)
        Bd_.push_back(block_diag(B[jk], n_, m));
    std::vector<MatXd> Ad;
    for (int j = 0; j < d_; ++j)
        Ad.push_back(block_diag(A[j], n_, m));

    // The Nyquist mode gets wavenumber +m/2 instead of a zero derivative; otherwise the
    // conservative form D (B D - A) loses one rank per component and shows spurious zeros.
    MatXc D = spectral_diff_matrix(m, X_).cast<cplx>();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            D(i, j) += I * (pi / X_) * (((i - j) % 2 == 0) ? 1.0 : -1.0);
    MatXc Dn = MatXc::Zero(n_ * m, n_ * m);
    for (int c = 0; c < n_; ++c)
        Dn.block(c * m, c * m, m, m) = D;

    MatXc DB = Dn * Bd_[0];
    L0_ = DB * Dn - Dn * Ad[0];
    L1_ = Bd_[0] * Dn + DB - Ad[0];
    for (int j = 1; j < d_; ++j)
        T_.push_back(Bd_[j * d_] * Dn + Dn * Bd_[j] - Ad[j]);
}

MatXc BlochAssembler::operator()(const VecXd& xi) const
{
    require(xi.size() == d_, "frequency has the wrong dimension");
    const double x1 = xi(0);
    MatXc L = L0_;
    L += (I * x1) * L1_;
    L -= (x1 * x1) * Bd_[0].cast<cplx>();
    for (int j = 1; j < d_; ++j) {
        if (xi(j) == 0)
            continue;
        L += (I * xi(j)) * T_[j - 1];
        L -= (x1 * xi(j)) * (Bd_[j * d_] + Bd_[j]).cast<cplx>();
        for (int k = 1; k < d_; ++k)
            L -= (xi(j) * xi(k)) * Bd_[j * d_ + k].cast<cplx>();
    }
    return L;
}

BlochOperator assemble(const ModelSpec& model, const WavePoint& wave, const VecXd& xi, int m)
{
    BlochAssembler as(model, wave, m);
    BlochOperator op;
    op.xi = xi;
    op.m = m;
    op.n = model.n;
    op.X = wave.X;
    op.L = as(xi);
    op.warnings = as.warnings();
    return op;
}

BlochSpectrum spectrum(const MatXc& L, double weight, bool vectors)
{
    Eigen::ComplexEigenSolver<MatXc> es(L, vectors);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::Numerical, "dense eigensolver failed");
    const long N = L.rows();
    std::vector<long> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    const VecXc& ev = es.eigenvalues();
    std::stable_sort(idx.begin(), idx.end(), [&](long a, long b) { return ev(a).real() > ev(b).real(); });
    BlochSpectrum s;
    s.eigenvalues.resize(N);
    for (long i = 0; i < N; ++i)
        s.eigenvalues(i) = ev(idx[i]);
    if (vectors) {
        s.right.resize(N, N);
        for (long i = 0; i < N; ++i)
            s.right.col(i) = es.eigenvectors().col(idx[i]);
        // biorthogonal left vectors: rows of V^{-1}, rescaled for the weighted inner product
        MatXc W = s.right.partialPivLu().inverse();
        s.left = W.adjoint() / weight;
    }
    return s;
}

BlochSpectrum spectrum(const BlochOperator& op, bool vectors)
{
    BlochSpectrum s = spectrum(op.L, op.X / op.m, vectors);
    s.xi = op.xi;
    return s;
}

std::vector<int> nearest_cluster(const VecXc& ev, int count, double separation)
{
    const int N = static_cast<int>(ev.size());
    require(count >= 1 && count < N, "cluster size out of range");
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(ev(a)) < std::abs(ev(b)); });
    double inner = std::abs(ev(idx[count - 1]));
    double outer = std::abs(ev(idx[count]));
    if (!(outer > separation * inner))
        fail(ErrorKind::BranchAmbiguity, "critical eigenvalue cluster is not separated from the rest of the spectrum");
    idx.resize(count);
    return idx;
}

StabilityReport verify_D1_D2(const ModelSpec& model, const WavePoint& wave, const std::vector<VecXd>& xi_grid,
                             const std::vector<VecXd>& rays, const std::vector<double>& radii,
                             const StabilityOptions& opt)
{
    BlochAssembler as(model, wave, opt.m);
    const int ncrit = wave.critical_count();
    StabilityReport rep;
    rep.notes = as.warnings();

    std::vector<VecXc> evs(xi_grid.size());
    parallel_for(static_cast<int>(xi_grid.size()), [&](int g) {
        evs[g] = spectrum(as(xi_grid[g]), as.h(), false).eigenvalues;
    });
    double maxre = -std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < xi_grid.size(); ++g) {
        const VecXc& ev = evs[g];
        std::vector<bool> skip(ev.size(), false);
        if (xi_grid[g].norm() < 1e-14) {
            int cl = 0;
            for (long i = 0; i < ev.size(); ++i)
                if (std::abs(ev(i)) < opt.cluster_tol)
                    ++cl;
            rep.cluster_at_zero = cl;
            if (cl > ncrit)
                fail(ErrorKind::Resolution, "unresolved eigenvalue cluster at xi = 0: " + std::to_string(cl)
                                                + " eigenvalues near 0, expected " + std::to_string(ncrit));
            if (cl < ncrit)
                rep.notes.push_back("fewer zero eigenvalues at xi = 0 than expected");
            for (long i = 0; i < ev.size(); ++i)
                if (std::abs(ev(i)) < opt.cluster_tol)
                    skip[i] = true;
        }
        for (long i = 0; i < ev.size(); ++i)
            if (!skip[i] && ev(i).real() > maxre) {
                maxre = ev(i).real();
                rep.worst_xi = xi_grid[g];
                rep.worst_lambda = ev(i);
            }
    }
    rep.margin = -maxre;
    rep.D1_pass = maxre < -opt.d1_margin;

    double theta = std::numeric_limits<double>::infinity();
    for (const auto& ray : rays)
        for (double r : radii) {
            VecXc ev = spectrum(as(r * ray), as.h(), false).eigenvalues;
            for (int i : nearest_cluster(ev, ncrit))
                theta = std::min(theta, -ev(i).real() / (r * r));
        }
    rep.theta_fit = theta;
    rep.D2_pass = rays.empty() ? false : theta > 0;
    return rep;
}

DispersionSurfaces track_surfaces(const ModelSpec& model, const WavePoint& wave, const std::vector<VecXd>& rays,
                                  const std::vector<double>& radii_in, int m)
{
    require(!rays.empty() && radii_in.size() >= 2, "need rays and at least two radii");
    BlochAssembler as(model, wave, m);
    const int nc = wave.critical_count();
    std::vector<double> radii = radii_in;
    std::sort(radii.begin(), radii.end());
    require(radii.front() > 0, "radii must be positive");

    DispersionSurfaces ds;
    ds.critical = nc;
    ds.rays = rays;
    ds.radii = radii;
    ds.m = m;
    ds.X = wave.X;
    const int R = static_cast<int>(radii.size());
    const int nr = static_cast<int>(rays.size());
    ds.lambda.assign(nr, std::vector<VecXc>(R, VecXc(nc)));
    ds.a_fit.resize(nr);
    ds.b_fit.resize(nr);
    ds.theta_fit.resize(nr);
    ds.right0.resize(nr);
    ds.left0.resize(nr);

    parallel_for(nr, [&](int ray) {
        VecXd xh = rays[ray];
        MatXc prevvec;
        VecXc prev(nc);
        for (int k = 0; k < R; ++k) {
            BlochSpectrum sp = spectrum(as(radii[k] * xh), as.h(), true);
            std::vector<int> pick(nc);
            if (k == 0) {
                pick = nearest_cluster(sp.eigenvalues, nc);
                ds.right0[ray].resize(sp.right.rows(), nc);
                ds.left0[ray].resize(sp.left.rows(), nc);
                for (int b = 0; b < nc; ++b) {
                    ds.right0[ray].col(b) = sp.right.col(pick[b]);
                    ds.left0[ray].col(b) = sp.left.col(pick[b]);
                }
            } else {
                double scale = radii[k] / radii[k - 1];
                for (int b = 0; b < nc; ++b) {
                    cplx pred = prev(b) * scale;
                    std::vector<std::pair<double, int>> dist;
                    for (long i = 0; i < sp.eigenvalues.size(); ++i)
                        dist.push_back({std::abs(sp.eigenvalues(i) - pred), static_cast<int>(i)});
                    std::partial_sort(dist.begin(), dist.begin() + 2, dist.end());
                    int best = dist[0].second;
                    if (!(dist[1].first > 2 * dist[0].first)) {
                        // fall back to eigenvector overlap
                        VecXc v = prevvec.col(b).normalized();
                        double o1 = -1, o2 = -1;
                        for (int c = 0; c < 4 && c < static_cast<int>(dist.size()); ++c) {
                            int i = dist[c].second;
                            double o = std::abs(v.dot(sp.right.col(i).normalized()));
                            if (o > o1) {
                                o2 = o1;
                                o1 = o;
                                best = i;
                            } else if (o > o2) {
                                o2 = o;
                            }
                        }
                        if (o1 < 0.9 || o2 > 0.9 * o1)
                            fail(ErrorKind::BranchAmbiguity, "branch continuation is ambiguous at radius "
                                                                 + std::to_string(radii[k]));
                    }
                    pick[b] = best;
                }
                for (int b = 0; b < nc; ++b)
                    for (int c = b + 1; c < nc; ++c)
                        if (pick[b] == pick[c])
                            fail(ErrorKind::BranchAmbiguity, "two branches merged at radius " + std::to_string(radii[k]));
            }
            prevvec.resize(sp.right.rows(), nc);
            for (int b = 0; b < nc; ++b) {
                prev(b) = sp.eigenvalues(pick[b]);
                prevvec.col(b) = sp.right.col(pick[b]);
                ds.lambda[ray][k](b) = prev(b);
            }
        }
        // lambda / r = c1 + c2 r (+ c3 r^2 as a nuisance term when there are enough radii)
        const int nt = R >= 4 ? 3 : 2;
        MatXd V(R, nt);
        for (int k = 0; k < R; ++k)
            for (int t = 0; t < nt; ++t)
                V(k, t) = std::pow(radii[k], t);
        auto qr = V.colPivHouseholderQr();
        ds.a_fit[ray].resize(nc);
        ds.b_fit[ray].resize(nc);
        ds.theta_fit[ray].resize(nc);
        for (int b = 0; b < nc; ++b) {
            VecXc y(R);
            for (int k = 0; k < R; ++k)
                y(k) = ds.lambda[ray][k](b) / radii[k];
            VecXd cr = qr.solve(VecXd(y.real()));
            VecXd ci = qr.solve(VecXd(y.imag()));
            cplx c1(cr(0), ci(0)), c2(cr(1), ci(1));
            ds.a_fit[ray](b) = I * c1;
            ds.b_fit[ray](b) = c2;
            double th = std::numeric_limits<double>::infinity();
            for (int k = 0; k < R; ++k)
                th = std::min(th, -ds.lambda[ray][k](b).real() / (radii[k] * radii[k]));
            ds.theta_fit[ray](b) = th;
        }
    });
    return ds;
}

} // namespace ptw
