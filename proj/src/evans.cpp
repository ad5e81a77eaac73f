#include "ptw/evans.hpp"
#include "ptw/bloch.hpp"
#include "ptw/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace ptw {

EvansSystem::EvansSystem(const ModelSpec& model, const WavePoint& wave, const EvansOptions& opt)
    : model_(model), n_(model.n), d_(model.d), X_(wave.X), interp_(wave.samples, wave.X), opt_(opt)
{
    require(wave.n == model.n && wave.d == model.d, "wave does not belong to this model");
    if (wave.nu.size() != d_ || std::abs(wave.nu(0) - 1) > 1e-12)
        fail(ErrorKind::NotApplicable, "the Evans system is built for waves travelling along x1 (nu = e1)");
    s_ = wave.s;
}

MatXc EvansSystem::matrix(double x, cplx lambda, const VecXd& xi) const
{
    VecXd u, up;
    interp_.eval(x, u, up);
    PointCoefficients pc = linearized_coefficients(model_, u, up, s_);
    const int n = n_, d = d_;
    MatXc Ct = MatXc::Zero(n, n), Cj = MatXc::Zero(n, n), At = MatXc::Zero(n, n), Bt = MatXc::Zero(n, n);
    for (int j = 1; j < d; ++j) {
        if (xi(j) == 0)
            continue;
        Ct += I * xi(j) * pc.B[j].cast<cplx>();
        Cj += I * xi(j) * pc.B[j * d].cast<cplx>();
        At += I * xi(j) * pc.A[j].cast<cplx>();
        for (int k = 1; k < d; ++k)
            Bt += xi(j) * xi(k) * pc.B[j * d + k].cast<cplx>();
    }
    MatXc Binv = pc.B[0].inverse().cast<cplx>();
    MatXc G = Binv * (pc.A[0].cast<cplx>() - Ct); // w' = G w + Binv z
    MatXc Mx(2 * n, 2 * n);
    Mx.topLeftCorner(n, n) = G;
    Mx.topRightCorner(n, n) = Binv;
    Mx.bottomLeftCorner(n, n) = -Cj * G + At + Bt + lambda * MatXc::Identity(n, n);
    Mx.bottomRightCorner(n, n) = -Cj * Binv;
    return Mx;
}

MatXc EvansSystem::monodromy(cplx lambda, const VecXd& xi, double shift) const
{
    require(xi.size() == d_, "frequency has the wrong dimension");
    const int N = 2 * n_;
    auto rhs = [&](double x, const MatXc& Y) -> MatXc {
        MatXc Mx = matrix(x, lambda, xi);
        if (shift != 0)
            Mx.diagonal().array() -= shift;
        return Mx * Y;
    };
    return integrate<MatXc>(rhs, 0.0, X_, MatXc::Identity(N, N), opt_.ode);
}

EvansValue EvansSystem::evaluate(cplx lambda, const VecXd& xi) const
{
    const int N = 2 * n_;
    // exponential growth shift from the frozen coefficients at x = 0
    Eigen::ComplexEigenSolver<MatXc> es(matrix(0.0, lambda, xi), false);
    double grow = es.eigenvalues().real().maxCoeff();
    double shift = grow * X_ > 30 ? grow : 0.0;

    MatXc Y = monodromy(lambda, xi, shift);
    cplx gamma = std::exp(I * xi(0) * X_) * std::exp(-shift * X_);
    EvansValue ev;
    ev.lambda = lambda;
    ev.xi = xi;
    ev.value = (Y - gamma * MatXc::Identity(N, N)).determinant();
    ev.log_scale = N * shift * X_;
    Eigen::JacobiSVD<MatXc> svd(Y);
    const auto& sv = svd.singularValues();
    ev.basis_condition = sv(N - 1) > 0 ? sv(0) / sv(N - 1) : std::numeric_limits<double>::infinity();
    ev.ill_conditioned = !(ev.basis_condition < opt_.cond_max);
    if (!std::isfinite(std::abs(ev.value)))
        fail(ErrorKind::Numerical, "Evans determinant overflowed");
    return ev;
}

std::vector<MatXc> EvansSystem::eigen_basis(cplx lambda, const VecXd& xi, const std::vector<double>& xs) const
{
    const int n = n_, N = 2 * n_;
    // change of variables (w, w') -> (w, z) at x
    auto T = [&](double x) {
        VecXd u, up;
        interp_.eval(x, u, up);
        PointCoefficients pc = linearized_coefficients(model_, u, up, s_);
        MatXc Ct = MatXc::Zero(n, n);
        for (int k = 1; k < d_; ++k)
            Ct += I * xi(k) * pc.B[k].cast<cplx>();
        MatXc t = MatXc::Zero(N, N);
        t.topLeftCorner(n, n).setIdentity();
        t.bottomLeftCorner(n, n) = -(pc.A[0].cast<cplx>() - Ct);
        t.bottomRightCorner(n, n) = pc.B[0].cast<cplx>();
        return t;
    };
    auto rhs = [&](double x, const MatXc& Y) -> MatXc { return matrix(x, lambda, xi) * Y; };
    MatXc T0 = T(0.0);
    Dopri5<MatXc> ode(rhs, 0.0, T0, opt_.ode);
    std::vector<MatXc> out;
    for (double x : xs) {
        require(x >= ode.x(), "eigen_basis sample points must be increasing and nonnegative");
        ode.advance_to(x);
        out.push_back(T(x).partialPivLu().solve(ode.state()));
    }
    return out;
}

std::function<cplx(double)> circle_contour(cplx center, double radius)
{
    return [center, radius](double s) { return center + radius * std::polar(1.0, 2 * pi * s); };
}

WindingResult winding_number(const EvansSystem& ev, const std::function<cplx(double)>& contour, const VecXd& xi,
                             const WindingOptions& opt)
{
    WindingResult res;
    struct Sample {
        double s;
        cplx v;      // unit phase of D
        double lmod; // log |D|
    };
    auto sample = [&](double s) {
        EvansValue e = ev.evaluate(contour(s), xi);
        ++res.evaluations;
        double a = std::abs(e.value);
        Sample sm{s, a > 0 ? e.value / a : cplx(0), a > 0 ? std::log(a) + e.log_scale : -INFINITY};
        return sm;
    };
    std::vector<Sample> pts;
    for (int k = 0; k <= opt.initial_points; ++k)
        pts.push_back(k < opt.initial_points ? sample(double(k) / opt.initial_points) : pts.front());
    pts.back().s = 1.0;

    double total = 0;
    double lmax = -INFINITY, lmin = INFINITY;
    for (const auto& p : pts)
        lmax = std::max(lmax, p.lmod), lmin = std::min(lmin, p.lmod);

    std::vector<Sample> stack;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        Sample a = pts[k];
        stack.push_back(pts[k + 1]);
        while (!stack.empty()) {
            Sample b = stack.back();
            double darg = std::arg(b.v / a.v);
            if (std::abs(darg) > opt.max_step_arg && b.s - a.s > 1e-9) {
                if (res.evaluations >= opt.max_points)
                    fail(ErrorKind::Contour, "argument tracking did not resolve within the evaluation budget");
                Sample mid = sample(0.5 * (a.s + b.s));
                lmax = std::max(lmax, mid.lmod);
                lmin = std::min(lmin, mid.lmod);
                stack.push_back(mid);
                continue;
            }
            total += darg;
            a = b;
            stack.pop_back();
        }
    }
    res.min_relative_modulus = std::exp(lmin - lmax);
    if (!(res.min_relative_modulus > opt.zero_tol))
        fail(ErrorKind::Contour, "Evans function vanishes on or near the contour");
    res.raw = total / (2 * pi);
    res.winding = static_cast<int>(std::lround(res.raw));
    if (std::abs(res.raw - res.winding) > 0.1)
        fail(ErrorKind::Contour, "winding number is not close to an integer");
    return res;
}

std::vector<std::pair<VecXd, cplx>> lowfreq_rays(int d, int count, unsigned seed)
{
    std::mt19937 gen(seed);
    auto uni = [&] { return (gen() + 0.5) / 4294967296.0; };
    auto gauss = [&] { return std::sqrt(-2 * std::log(uni())) * std::cos(2 * pi * uni()); };
    std::vector<std::pair<VecXd, cplx>> rays;
    for (int i = 0; i < count; ++i) {
        VecXd x(d);
        for (int j = 0; j < d; ++j)
            x(j) = gauss();
        cplx l(gauss(), gauss());
        double nrm = std::sqrt(x.squaredNorm() + std::norm(l));
        rays.push_back({x / nrm, l / nrm});
    }
    return rays;
}

LowFreqResult lowfreq_factorization(const EvansSystem& ev, const HomogenizedSystem& hs,
                                    const std::vector<std::pair<VecXd, cplx>>& rays, const std::vector<double>& radii)
{
    require(radii.size() >= 2, "need at least two radii");
    require(hs.d == ev.d() && hs.n == ev.n(), "homogenized system does not match the Evans system");
    LowFreqResult res;
    res.radii = radii;
    const int R = static_cast<int>(radii.size());

    // extrapolation to r = 0 with a polynomial in r of degree min(R-1, 2)
    const int deg = std::min(R - 1, 2);
    MatXd V(R, deg + 1), Vl(R, 2);
    for (int k = 0; k < R; ++k) {
        for (int t = 0; t <= deg; ++t)
            V(k, t) = std::pow(radii[k], t);
        Vl(k, 0) = 1;
        Vl(k, 1) = std::log(radii[k]);
    }
    auto qr = V.colPivHouseholderQr();
    auto qrl = Vl.colPivHouseholderQr();

    for (const auto& [xh, lh] : rays) {
        LowFreqRay ray;
        ray.xi_hat = xh;
        ray.lambda_hat = lh;
        // exclude rays on (or very near) the zero set of the homogeneous Delta
        double scale = std::pow(hs.J_MN.norm() + hs.J_F[0].norm(), hs.n + hs.d);
        cplx dl = delta(hs, xh, lh);
        if (std::abs(dl) < 1e-6 * scale) {
            ray.excluded = true;
            res.notes.push_back("ray excluded: Delta vanishes along it");
            res.rays.push_back(ray);
            continue;
        }
        VecXd logd(R);
        VecXc rat(R);
        for (int k = 0; k < R; ++k) {
            double r = radii[k];
            EvansValue e = ev.evaluate(r * lh, r * xh);
            cplx D = e.full();
            cplx Dl = delta(hs, r * xh, r * lh);
            ray.D.push_back(D);
            ray.ratio.push_back(D / Dl);
            logd(k) = std::log(std::abs(D));
            rat(k) = D / Dl;
        }
        ray.order = qrl.solve(logd)(1);
        VecXd gr = qr.solve(VecXd(rat.real()));
        VecXd gi = qr.solve(VecXd(rat.imag()));
        ray.gamma0 = cplx(gr(0), gi(0));
        res.rays.push_back(ray);
    }

    cplx sum = 0;
    double osum = 0;
    for (const auto& r : res.rays)
        if (!r.excluded) {
            sum += r.gamma0;
            osum += r.order;
            ++res.rays_used;
        }
    if (res.rays_used == 0)
        fail(ErrorKind::Domain, "every ray was excluded");
    res.gamma0 = sum / double(res.rays_used);
    res.vanishing_order = osum / res.rays_used;
    double spread = 0;
    for (const auto& a : res.rays)
        for (const auto& b : res.rays)
            if (!a.excluded && !b.excluded)
                spread = std::max(spread, std::abs(a.gamma0 - b.gamma0));
    res.gamma0_spread = spread / std::abs(res.gamma0);
    return res;
}

} // namespace ptw
