#include "ptw/profile.hpp"
#include "ptw/errors.hpp"
#include "ptw/fourier.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ptw {

namespace {

VecXd default_nu(int d, const VecXd& nu)
{
    if (nu.size() == 0)
        return VecXd::Unit(d, 0);
    require(nu.size() == d, "direction nu has the wrong dimension");
    require(nu.norm() > 0, "direction nu must be nonzero");
    return nu.normalized();
}

// DF(u) v = C^{-1} (Df_nu v - s v - (DB_nu v) u')
MatXd rhs_jacobian(const ModelSpec& model, const VecXd& u, double s, const VecXd& nu, const VecXd& up)
{
    const int n = model.n;
    MatXd C = model.B_nu(nu, u);
    MatXd J = -s * MatXd::Identity(n, n);
    for (int j = 0; j < model.d; ++j)
        if (nu(j) != 0)
            J += nu(j) * model.Df(j, u);
    if (!model.constant_viscosity) {
        for (int c = 0; c < n; ++c) {
            VecXd e = VecXd::Unit(n, c);
            MatXd dB = MatXd::Zero(n, n);
            for (int j = 0; j < model.d; ++j)
                for (int k = 0; k < model.d; ++k)
                    if (nu(j) != 0 && nu(k) != 0)
                        dB += nu(j) * nu(k) * model.DB(j, k, u, e);
            J.col(c) -= dB * up;
        }
    }
    return C.partialPivLu().solve(J);
}

struct Flow {
    VecXd uX;
    VecXd duX;
    MatXd Phi; // du(X)/da
    MatXd Sp;  // du(X)/d(s, eta, q)
};

// dnu: d x (d-1) derivative of nu with respect to eta (may be empty)
Flow flow(const ModelSpec& model, const VecXd& a, double X, double s, const VecXd& nu, const VecXd& q,
          const MatXd& dnu, bool params, const OdeOptions& opt)
{
    const int n = model.n;
    const int ne = static_cast<int>(dnu.cols());
    const int np = params ? 1 + ne + n : 0;
    MatXd Y = MatXd::Zero(n, 1 + n + np);
    Y.col(0) = a;
    Y.block(0, 1, n, n).setIdentity();

    auto rhs = [&](double, const MatXd& y) -> MatXd {
        VecXd u = y.col(0);
        VecXd up = profile_rhs(model, u, s, nu, q);
        MatXd J = rhs_jacobian(model, u, s, nu, up);
        MatXd out(n, y.cols());
        out.col(0) = up;
        out.rightCols(y.cols() - 1).noalias() = J * y.rightCols(y.cols() - 1);
        if (params) {
            auto lu = model.B_nu(nu, u).partialPivLu();
            out.col(1 + n) -= lu.solve(u);
            for (int l = 0; l < ne; ++l) {
                double h = 1e-6;
                VecXd w = dnu.col(l);
                VecXd fp = profile_rhs(model, u, s, nu + h * w, q);
                VecXd fm = profile_rhs(model, u, s, nu - h * w, q);
                out.col(2 + n + l) += (fp - fm) / (2 * h);
            }
            out.block(0, 2 + n + ne, n, n) -= lu.solve(MatXd::Identity(n, n));
        }
        return out;
    };
    MatXd YX = integrate<MatXd>(rhs, 0.0, X, Y, opt);
    Flow fl;
    fl.uX = YX.col(0);
    fl.duX = profile_rhs(model, fl.uX, s, nu, q);
    fl.Phi = YX.block(0, 1, n, n);
    if (params)
        fl.Sp = YX.rightCols(np);
    return fl;
}

MatXd pinv_solve(const MatXd& J, const VecXd& r, double rcond)
{
    Eigen::JacobiSVD<MatXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(rcond);
    return svd.solve(r);
}

double amplitude(const MatXd& samples)
{
    double amp = 0;
    for (long c = 0; c < samples.cols(); ++c)
        amp = std::max(amp, samples.col(c).maxCoeff() - samples.col(c).minCoeff());
    return amp;
}

} // namespace

VecXd profile_rhs(const ModelSpec& model, const VecXd& u, double s, const VecXd& nu, const VecXd& q)
{
    VecXd g = model.f_nu(nu, u) - s * u - q;
    return model.B_nu(nu, u).partialPivLu().solve(g);
}

ProfileSamples integrate_profile(const ModelSpec& model, const VecXd& a, double X, double s, const VecXd& nu,
                                 const VecXd& q, int m, const OdeOptions& opt)
{
    require(X > 0, "profile period must be positive");
    require(m >= 2, "need at least two samples");
    VecXd nn = default_nu(model.d, nu);
    Dopri5<VecXd> ode([&](double, const VecXd& u) { return profile_rhs(model, u, s, nn, q); }, 0.0, a, opt);
    ProfileSamples out;
    out.samples.resize(m, model.n);
    out.samples.row(0) = a.transpose();
    for (int k = 1; k < m; ++k) {
        ode.advance_to(X * k / m);
        out.samples.row(k) = ode.state().transpose();
    }
    ode.advance_to(X);
    out.end = ode.state();
    return out;
}

double first_return_time(const ModelSpec& model, const VecXd& a, double s, const VecXd& nu, const VecXd& q,
                         double x_max, const OdeOptions& opt)
{
    VecXd nn = default_nu(model.d, nu);
    auto rhs = [&](double, const VecXd& u) { return profile_rhs(model, u, s, nn, q); };
    VecXd psi = rhs(0.0, a);
    if (psi.norm() < 1e-12)
        fail(ErrorKind::DegenerateOrbit, "the start point is an equilibrium of the profile flow");
    psi.normalize();
    auto g = [&](const VecXd& u) { return psi.dot(u - a); };

    Dopri5<VecXd> ode(rhs, 0.0, a, opt);
    bool went_negative = false;
    while (ode.x() < x_max) {
        double x0 = ode.x();
        VecXd u0 = ode.state();
        ode.step(x_max);
        double g0 = g(u0), g1 = g(ode.state());
        if (g1 < 0)
            went_negative = true;
        if (went_negative && g0 < 0 && g1 >= 0) {
            // Illinois iteration on the step interval
            double xa = x0, xb = ode.x(), ga = g0, gb = g1;
            int side = 0;
            auto at = [&](double x) {
                return g(integrate<VecXd>(rhs, x0, x, u0, opt));
            };
            for (int it = 0; it < 100 && std::abs(xb - xa) > 1e-14 * std::max(1.0, xb); ++it) {
                double xc = (xa * gb - xb * ga) / (gb - ga);
                double gc = at(xc);
                if (gc == 0)
                    return xc;
                if ((gc < 0) == (ga < 0)) {
                    xa = xc;
                    ga = gc;
                    if (side == -1)
                        gb /= 2;
                    side = -1;
                } else {
                    xb = xc;
                    gb = gc;
                    if (side == 1)
                        ga /= 2;
                    side = 1;
                }
            }
            return std::abs(ga) < std::abs(gb) ? xa : xb;
        }
    }
    fail(ErrorKind::Convergence, "no return to the section before x_max");
}

WavePoint WavePoint::constant(const ModelSpec& model, const VecXd& state, double X, int m)
{
    require(state.size() == model.n, "constant state has the wrong size");
    require(X > 0, "period must be positive");
    WavePoint w;
    w.model_id = model.id;
    w.n = model.n;
    w.d = model.d;
    w.X = X;
    w.s = 0;
    w.nu = VecXd::Unit(model.d, 0);
    w.q = model.f_nu(w.nu, state);
    w.anchor = state;
    w.samples = state.transpose().replicate(m, 1);
    w.is_solution = false;
    ClassFunctions cf = class_functions(model, w);
    w.M = cf.M;
    w.F = cf.F;
    return w;
}

WavePoint WavePoint::synthetic(const ModelSpec& model, const MatXd& samples, double X)
{
    require(samples.cols() == model.n, "synthetic samples have the wrong number of components");
    require(samples.rows() >= 4 && samples.rows() % 2 == 0, "synthetic samples need an even count >= 4");
    WavePoint w;
    w.model_id = model.id;
    w.n = model.n;
    w.d = model.d;
    w.X = X;
    w.s = 0;
    w.nu = VecXd::Unit(model.d, 0);
    w.anchor = samples.row(0).transpose();
    w.samples = samples;
    w.is_solution = false;
    ClassFunctions cf = class_functions(model, w);
    w.M = cf.M;
    w.F = cf.F;
    w.q = cf.F * w.nu; // best constant, exact when samples solve the profile equation
    return w;
}

ClassFunctions class_functions(const ModelSpec& model, const WavePoint& w)
{
    const int m = w.m();
    require(m >= 2, "class functions need sampled profile");
    ClassFunctions cf;
    cf.X = w.X;
    cf.Omega = 1.0 / w.X;
    cf.S = w.s;
    cf.N = w.nu;
    cf.Q = w.q;
    cf.M = w.samples.colwise().mean().transpose();
    MatXd du = spectral_derivative(w.samples, w.X);
    cf.F = MatXd::Zero(model.n, model.d);
    for (int i = 0; i < m; ++i) {
        VecXd u = w.samples.row(i).transpose();
        VecXd up = du.row(i).transpose();
        for (int j = 0; j < model.d; ++j) {
            VecXd fj = model.f(j, u);
            for (int k = 0; k < model.d; ++k)
                if (w.nu(k) != 0)
                    fj -= w.nu(k) * (model.B(j, k, u) * up);
            cf.F.col(j) += fj;
        }
    }
    cf.F /= m;
    return cf;
}

WavePoint find_periodic(const ModelSpec& model, const PeriodicGuess& guess, const FindOptions& opt)
{
    const int n = model.n;
    require(guess.a.size() == n, "guess state has the wrong size");
    VecXd nu = default_nu(model.d, guess.nu);
    VecXd q = guess.q.size() ? guess.q : VecXd::Zero(n);
    require(q.size() == n, "integration constant q has the wrong size");
    require(is_power_of_two(opt.m), "profile sample count must be a power of two");

    VecXd ag = guess.a;
    VecXd psi = profile_rhs(model, ag, guess.s, nu, q);
    if (psi.norm() < 1e-12)
        fail(ErrorKind::DegenerateOrbit, "guess is an equilibrium of the profile flow; no nonconstant orbit");
    psi.normalize();

    double X = guess.X > 0 ? guess.X : first_return_time(model, ag, guess.s, nu, q, 1e4, opt.ode);
    VecXd a = ag;
    MatXd dnu(model.d, 0);

    double rnorm = 0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        Flow fl = flow(model, a, X, guess.s, nu, q, dnu, false, opt.ode);
        VecXd r(n + 1);
        r.head(n) = fl.uX - a;
        r(n) = psi.dot(a - ag);
        rnorm = r.norm();
        if (rnorm < opt.newton_tol)
            break;
        MatXd J = MatXd::Zero(n + 1, n + 1);
        J.block(0, 0, n, 1) = fl.duX;
        J.block(0, 1, n, n) = fl.Phi - MatXd::Identity(n, n);
        J.block(n, 1, 1, n) = psi.transpose();
        VecXd step = pinv_solve(J, -r, 1e-10);
        // damped update
        double lam = 1.0;
        for (int k = 0; k < 8; ++k) {
            double Xt = X + lam * step(0);
            if (Xt > 0)
                break;
            lam /= 2;
        }
        X += lam * step(0);
        a += lam * step.tail(n);
        if (!(X > 0) || !a.allFinite())
            fail(ErrorKind::Convergence, "periodic orbit Newton iteration diverged");
    }
    if (rnorm >= opt.newton_tol)
        fail(ErrorKind::Convergence, "periodic orbit Newton did not converge (residual " + std::to_string(rnorm) + ")");

    ProfileSamples ps = integrate_profile(model, a, X, guess.s, nu, q, opt.m, opt.ode);
    double amp = amplitude(ps.samples);
    if (amp < 1e-7 * (1 + a.norm()))
        fail(ErrorKind::DegenerateOrbit, "periodic orbit collapsed to an equilibrium");

    WavePoint w;
    w.model_id = model.id;
    w.n = n;
    w.d = model.d;
    w.X = X;
    w.s = guess.s;
    w.nu = nu;
    w.q = q;
    w.anchor = a;
    w.samples = ps.samples;
    w.is_solution = true;
    ClassFunctions cf = class_functions(model, w);
    w.M = cf.M;
    w.F = cf.F;
    return w;
}

// ---------------------------------------------------------------------------

ManifoldChart::ManifoldChart(const ModelSpec& model, const WavePoint& base, const FindOptions& opt)
    : model_(model), base_(base), opt_(opt), n_(model.n), d_(model.d)
{
    if (!base.is_solution)
        fail(ErrorKind::NotApplicable, "constant or synthetic profiles carry no manifold of periodic solutions");
    const int P = param_dim();
    nu0_ = base.nu;
    a0_ = base.anchor;
    // orthonormal complement of nu0
    {
        Eigen::JacobiSVD<MatXd> svd(nu0_.transpose(), Eigen::ComputeFullV);
        E_ = svd.matrixV().rightCols(d_ - 1);
    }
    y0_ = VecXd::Zero(P);
    y0_(0) = base.X;
    y0_.segment(1, n_) = a0_;
    y0_(1 + n_) = base.s;
    y0_.tail(n_) = base.q;
    psi_ = profile_rhs(model_, a0_, base.s, nu0_, base.q).normalized();

    DG0_ = jacobian(y0_);
    Eigen::JacobiSVD<MatXd> svd(DG0_, Eigen::ComputeFullV);
    const VecXd& sv = svd.singularValues();
    if (sv(n_) <= 1e-9 * sv(0))
        fail(ErrorKind::Nondegeneracy, "the periodic-orbit map is not a submersion at the base wave (rank deficient)");
    T_ = svd.matrixV().rightCols(P - (n_ + 1));
    R_ = DG0_.transpose();
}

VecXd ManifoldChart::nu_of(const VecXd& y) const
{
    VecXd v = nu0_;
    if (d_ > 1)
        v += E_ * y.segment(2 + n_, d_ - 1);
    return v.normalized();
}

VecXd ManifoldChart::residual(const VecXd& y) const
{
    double X = y(0);
    VecXd a = y.segment(1, n_);
    double s = y(1 + n_);
    VecXd q = y.tail(n_);
    if (!(X > 0))
        fail(ErrorKind::Convergence, "chart point left the region X > 0");
    ProfileSamples ps = integrate_profile(model_, a, X, s, nu_of(y), q, 2, opt_.ode);
    VecXd G(n_ + 1);
    G.head(n_) = ps.end - a;
    G(n_) = psi_.dot(a - a0_);
    return G;
}

MatXd ManifoldChart::jacobian(const VecXd& y) const
{
    const int P = param_dim();
    double X = y(0);
    VecXd a = y.segment(1, n_);
    double s = y(1 + n_);
    VecXd q = y.tail(n_);
    VecXd nu = nu_of(y);
    MatXd dnu(d_, d_ - 1);
    if (d_ > 1) {
        VecXd v = nu0_ + E_ * y.segment(2 + n_, d_ - 1);
        dnu = (MatXd::Identity(d_, d_) - nu * nu.transpose()) * E_ / v.norm();
    }
    Flow fl = flow(model_, a, X, s, nu, q, dnu, true, opt_.ode);
    MatXd J = MatXd::Zero(n_ + 1, P);
    J.block(0, 0, n_, 1) = fl.duX;
    J.block(0, 1, n_, n_) = fl.Phi - MatXd::Identity(n_, n_);
    J.block(0, 1 + n_, n_, fl.Sp.cols()) = fl.Sp;
    J.block(n_, 1, 1, n_) = psi_.transpose();
    return J;
}

VecXd ManifoldChart::correct(const VecXd& y_pred) const
{
    VecXd y = y_pred;
    MatXd K = DG0_ * R_;
    Eigen::PartialPivLU<MatXd> lu(K);
    double prev = std::numeric_limits<double>::infinity();
    int extra = 0;
    for (int it = 0; it < 60; ++it) {
        VecXd G = residual(y);
        double gn = G.norm();
        if (gn < opt_.newton_tol) {
            // a couple of extra chord steps tighten the point well below the tolerance
            if (++extra > 2 || gn < 1e-3 * opt_.newton_tol)
                return y;
        } else if (gn > 0.5 * prev) {
            lu.compute(jacobian(y) * R_);
        }
        prev = gn;
        y -= R_ * lu.solve(G);
        if (!y.allFinite())
            break;
    }
    fail(ErrorKind::Convergence, "projection onto the manifold of periodic orbits did not converge");
}

VecXd ManifoldChart::project(const VecXd& c) const
{
    require(c.size() == dim(), "chart coordinates have the wrong dimension");
    return correct(y0_ + T_ * c);
}

WavePoint ManifoldChart::wave_at(const VecXd& y) const
{
    WavePoint w;
    w.model_id = model_.id;
    w.n = n_;
    w.d = d_;
    w.X = y(0);
    w.anchor = y.segment(1, n_);
    w.s = y(1 + n_);
    w.nu = nu_of(y);
    w.q = y.tail(n_);
    w.samples = integrate_profile(model_, w.anchor, w.X, w.s, w.nu, w.q, opt_.m, opt_.ode).samples;
    w.is_solution = true;
    ClassFunctions cf = class_functions(model_, w);
    w.M = cf.M;
    w.F = cf.F;
    return w;
}

WavePoint ManifoldChart::point(const VecXd& c) const { return wave_at(project(c)); }

ContinuationResult continue_manifold(const ManifoldChart& chart, const VecXd& direction, int steps, double ds)
{
    const int P = chart.param_dim();
    const int k = chart.dim();
    require(direction.size() == P, "continuation direction must live in parameter space");
    require(steps >= 1 && ds > 0, "continuation needs steps >= 1 and ds > 0");
    VecXd dc = chart.tangent().transpose() * direction;
    if (dc.norm() < 1e-12 * direction.norm())
        fail(ErrorKind::Domain, "continuation direction is normal to the manifold of periodic orbits");
    dc.normalize();
    MatXd Tperp;
    {
        Eigen::JacobiSVD<MatXd> svd(dc.transpose(), Eigen::ComputeFullV);
        Tperp = chart.tangent() * svd.matrixV().rightCols(k - 1);
    }
    const VecXd& y0 = chart.base_params();
    const double tol = chart.options().newton_tol;
    const int n = chart.model().n;

    auto tangent_at = [&](const VecXd& y, const VecXd& prev) {
        MatXd A(n + 1 + k - 1, P);
        A << chart.jacobian(y), Tperp.transpose();
        Eigen::JacobiSVD<MatXd> svd(A, Eigen::ComputeFullV);
        VecXd t = svd.matrixV().col(P - 1);
        if (t.dot(prev) < 0)
            t = -t;
        return t;
    };

    ContinuationResult res;
    VecXd y = y0;
    VecXd t = tangent_at(y, chart.tangent() * dc);
    res.family.push_back(chart.base());
    res.params.push_back(y);
    res.arclength.push_back(0);
    double X0 = y0(0);
    double s_acc = 0;

    for (int step = 0; step < steps; ++step) {
        double h = ds;
        bool ok = false;
        VecXd ynew;
        std::string why;
        while (h >= ds / 64) {
            ynew = y + h * t;
            ok = false;
            for (int it = 0; it < 25; ++it) {
                VecXd F(P);
                F.head(n + 1) = chart.residual(ynew);
                F.segment(n + 1, k - 1) = Tperp.transpose() * (ynew - y0);
                F(P - 1) = t.dot(ynew - y) - h;
                if (F.norm() < tol) {
                    ok = true;
                    break;
                }
                MatXd J(P, P);
                J << chart.jacobian(ynew), Tperp.transpose(), t.transpose();
                ynew -= J.partialPivLu().solve(F);
                if (!ynew.allFinite() || !(ynew(0) > 0))
                    break;
            }
            if (ok)
                break;
            h /= 2;
        }
        if (!ok) {
            res.reached_end = true;
            res.stop_reason = "corrector failed to converge; end of the continuable family";
            break;
        }
        WavePoint w;
        try {
            w = chart.wave_at(ynew);
        } catch (const Error& e) {
            res.reached_end = true;
            res.stop_reason = e.what();
            break;
        }
        if (amplitude(w.samples) < 1e-6 * (1 + w.anchor.norm())) {
            res.reached_end = true;
            res.stop_reason = "orbit collapsed to an equilibrium";
            break;
        }
        if (ynew(0) > 50 * X0) {
            res.reached_end = true;
            res.stop_reason = "period blow-up (homoclinic limit)";
            break;
        }
        s_acc += (ynew - y).norm();
        VecXd tnew = tangent_at(ynew, t);
        y = ynew;
        t = tnew;
        res.family.push_back(std::move(w));
        res.params.push_back(y);
        res.arclength.push_back(s_acc);
    }
    return res;
}

namespace {

VecXd class_vector(const WavePoint& w)
{
    const int n = w.n, d = w.d;
    VecXd g(n + d + d * n + 1);
    g.head(n) = w.M;
    g.segment(n, d) = w.nu / w.X;
    for (int j = 0; j < d; ++j)
        g.segment(n + d + j * n, n) = w.F.col(j);
    g(n + d + d * n) = w.s / w.X;
    return g;
}

} // namespace

ManifoldJacobians manifold_jacobians(const ManifoldChart& chart, double h_rel)
{
    const int k = chart.dim();
    const int n = chart.model().n, d = chart.model().d;
    double h = h_rel * std::max(1.0, chart.base_params().cwiseAbs().maxCoeff());
    const int gl = n + d + d * n + 1;
    MatXd D(gl, k);
    double err = 0;
    for (int c = 0; c < k; ++c) {
        VecXd e = VecXd::Unit(k, c);
        auto g = [&](double t) { return class_vector(chart.point(t * e)); };
        VecXd Dh = (g(h) - g(-h)) / (2 * h);
        VecXd Dh2 = (g(h / 2) - g(-h / 2)) / h;
        D.col(c) = (4 * Dh2 - Dh) / 3;
        err = std::max(err, (Dh2 - Dh).cwiseAbs().maxCoeff());
    }
    ManifoldJacobians mj;
    mj.step = h;
    mj.richardson_error = err;
    mj.J_MN = D.topRows(n + d);
    for (int j = 0; j < d; ++j) {
        MatXd JF = MatXd::Zero(n + d, k);
        JF.topRows(n) = D.middleRows(n + d + j * n, n);
        JF.row(n + j) = D.row(n + d + d * n);
        mj.J_F.push_back(JF);
    }
    return mj;
}

} // namespace ptw
