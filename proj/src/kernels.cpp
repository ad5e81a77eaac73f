#include "ptw/errors.hpp"
#include "ptw/fourier.hpp"
#include "ptw/parallel.hpp"
#include "ptw/semigroup.hpp"

#include <algorithm>
#include <cmath>

namespace ptw {

void gauss_legendre(int k, VecXd& nodes, VecXd& weights)
{
    require(k >= 1, "Gauss-Legendre order must be positive");
    MatXd J = MatXd::Zero(k, k);
    for (int i = 1; i < k; ++i) {
        double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<MatXd> es(J);
    nodes = es.eigenvalues();
    weights = 2 * es.eigenvectors().row(0).transpose().array().square();
}

BallQuadrature ball_quadrature(int d, double rmax, int n_theta, int n_phi, int gl, double r_first)
{
    require(rmax > 0 && r_first > 0, "radii must be positive");
    if (d < 1 || d > 3)
        fail(ErrorKind::NotApplicable, "ball quadrature is implemented for d = 1, 2, 3");
    BallQuadrature q;
    q.d = d;
    q.rmax = rmax;
    if (d == 1) {
        q.angles = {VecXd::Constant(1, 1.0), VecXd::Constant(1, -1.0)};
        q.angle_weights = {1.0, 1.0};
    } else if (d == 2) {
        for (int k = 0; k < n_phi; ++k) {
            double a = 2 * pi * (k + 0.5) / n_phi;
            VecXd v(2);
            v << std::cos(a), std::sin(a);
            q.angles.push_back(v);
            q.angle_weights.push_back(2 * pi / n_phi);
        }
    } else {
        VecXd x, w;
        gauss_legendre(n_theta, x, w);
        for (int i = 0; i < n_theta; ++i)
            for (int k = 0; k < n_phi; ++k) {
                double a = 2 * pi * (k + 0.5) / n_phi;
                double s = std::sqrt(1 - x(i) * x(i));
                VecXd v(3);
                v << x(i), s * std::cos(a), s * std::sin(a);
                q.angles.push_back(v);
                q.angle_weights.push_back(w(i) * 2 * pi / n_phi);
            }
    }
    // graded panels: geometric near the origin, at most rmax/8 wide
    std::vector<double> edges{0.0};
    while (edges.back() < rmax) {
        double x = edges.back();
        double next = x == 0 ? r_first : std::min(2 * x, x + rmax / 8);
        edges.push_back(std::min(next, rmax));
    }
    VecXd gx, gw;
    gauss_legendre(gl, gx, gw);
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        double a = edges[p], b = edges[p + 1];
        for (int i = 0; i < gl; ++i) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * gx(i);
            q.radii.push_back(r);
            q.radial_weights.push_back(0.5 * (b - a) * gw(i) * std::pow(r, d - 1));
        }
    }
    return q;
}

double WaveKernelBundle::biorthogonality_error() const
{
    const double h = X / m;
    const int k = critical;
    return (h * Pi_tilde.adjoint() * Pi - MatXc::Identity(k, k)).norm();
}

double WaveKernelBundle::alpha_error() const
{
    double e = 0;
    for (size_t a = 0; a < alpha.size(); ++a)
        e = std::max(e, (alpha_tilde[a].adjoint() * alpha[a] - MatXc::Identity(critical, critical)).norm());
    return e;
}

int WaveKernelBundle::angle_index(const VecXd& xh, double tol) const
{
    for (size_t a = 0; a < angles.size(); ++a)
        if ((angles[a] - xh).norm() <= tol)
            return static_cast<int>(a);
    return -1;
}

namespace {

int nearest_angle(const WaveKernelBundle& b, const VecXd& xh)
{
    int best = 0;
    double dot = -2;
    for (size_t a = 0; a < b.angles.size(); ++a) {
        double v = b.angles[a].dot(xh);
        if (v > dot) {
            dot = v;
            best = static_cast<int>(a);
        }
    }
    return best;
}

// kernel pieces at one frequency: exponents c1 r, c2 r^2 and the angular matrices
struct Pieces {
    VecXc first, second;
    MatXc alpha, alpha_tilde;
};

Pieces pieces(const WaveKernelBundle& b, const VecXd& xi)
{
    Pieces p;
    const int k = b.critical;
    double r = xi.norm();
    if (r == 0) {
        p.first = p.second = VecXc::Zero(k);
        p.alpha = p.alpha_tilde = MatXc::Identity(k, k);
        if (!b.alpha.empty()) {
            p.alpha = b.alpha[0];
            p.alpha_tilde = b.alpha_tilde[0];
        }
        return p;
    }
    VecXd xh = xi / r;
    int a = b.angle_index(xh, 1e-12);
    if (a < 0 && b.has_forms) {
        p.first = VecXc::Constant(1, xh.cast<cplx>().dot(b.c1_form) * r);
        p.second = VecXc::Constant(1, (xh.cast<cplx>().transpose() * b.c2_form * xh.cast<cplx>())(0, 0) * r * r);
        p.alpha = p.alpha_tilde = MatXc::Identity(1, 1);
        return p;
    }
    if (a < 0)
        a = nearest_angle(b, xh);
    p.first = b.c1[a] * r;
    p.second = b.c2[a] * (r * r);
    p.alpha = b.alpha[a];
    p.alpha_tilde = b.alpha_tilde[a];
    return p;
}

MatXc kernel_sum(const Pieces& p, const VecXc& exponents)
{
    const long k = p.alpha.rows();
    MatXc out = MatXc::Zero(k, k);
    for (long j = 0; j < exponents.size(); ++j)
        out += std::exp(exponents(j)) * p.alpha.col(j) * p.alpha_tilde.col(j).adjoint();
    return out;
}

} // namespace

VecXc WaveKernelBundle::lambda_dagger(const VecXd& xi) const
{
    Pieces p = pieces(*this, xi);
    return p.first + p.second;
}

MatXc WaveKernelBundle::g_hat(const VecXd& xi, double t) const
{
    double phi = cutoff(xi.norm(), eps);
    if (phi == 0)
        return MatXc::Zero(critical, critical);
    Pieces p = pieces(*this, xi);
    return phi * kernel_sum(p, (p.first + p.second) * t);
}

MatXc WaveKernelBundle::w_hat(const VecXd& xi, double t) const
{
    double phi = cutoff(xi.norm(), eps);
    if (phi == 0)
        return MatXc::Zero(critical, critical);
    Pieces p = pieces(*this, xi);
    return phi * kernel_sum(p, p.first * t);
}

MatXc WaveKernelBundle::k_hat(const VecXd& xi, double t) const
{
    Pieces p = pieces(*this, xi);
    return kernel_sum(p, p.second * t);
}

namespace {

// real orthonormal basis (columns) of the span of the columns of a complex matrix
MatXd real_span(const MatXc& P, int k)
{
    MatXd S(P.rows(), 2 * P.cols());
    S << P.real(), P.imag();
    Eigen::BDCSVD<MatXd> svd(S, Eigen::ComputeThinU);
    const VecXd& sv = svd.singularValues();
    if (sv.size() > k && !(sv(k) < 1e-6 * sv(0)))
        fail(ErrorKind::Nondegeneracy, "critical eigenspace at xi = 0 has no real basis of dimension "
                                           + std::to_string(k));
    return svd.matrixU().leftCols(k);
}

} // namespace

WaveKernelBundle build_wave_kernels(const ModelSpec& model, const WavePoint& wave, const DispersionSurfaces& surfaces,
                                    double eps)
{
    require(eps > 0, "cutoff radius must be positive");
    require(!surfaces.rays.empty(), "surfaces carry no rays");
    WaveKernelBundle b;
    b.critical = surfaces.critical;
    b.n = wave.n;
    b.d = wave.d;
    b.m = surfaces.m;
    b.X = wave.X;
    b.eps = eps;
    const int k = b.critical;
    BlochAssembler as(model, wave, b.m);
    const double h = as.h();
    MatXc L0 = as(VecXd::Zero(wave.d));
    VecXc ev = spectrum(L0, h, false).eigenvalues;
    std::vector<double> mags(ev.size());
    for (long i = 0; i < ev.size(); ++i)
        mags[i] = std::abs(ev(i));
    std::sort(mags.begin(), mags.end());
    if (!(mags[k] > 1e3 * std::max(mags[k - 1], 1e-14)))
        fail(ErrorKind::ConstraintCount, "zero eigen-cluster of L_0 is not " + std::to_string(k) + "-dimensional");
    MatXc P0 = contour_projector(L0, std::sqrt(std::max(mags[k - 1], 1e-14) * mags[k]));

    // h-orthonormal real basis of the kernel, and its dual basis of the adjoint kernel
    b.Pi = (real_span(P0, k) / std::sqrt(h)).cast<cplx>();
    MatXc Y = real_span(P0.adjoint(), k).cast<cplx>();
    MatXc Mk = h * Y.adjoint() * b.Pi;
    b.Pi_tilde = Y * Mk.inverse().adjoint();

    b.angles = surfaces.rays;
    const int na = static_cast<int>(surfaces.rays.size());
    for (int a = 0; a < na; ++a) {
        MatXc al = h * b.Pi_tilde.adjoint() * surfaces.right0[a];
        b.alpha.push_back(al);
        b.alpha_tilde.push_back(al.inverse().adjoint());
        b.c1.push_back(-I * surfaces.a_fit[a]);
        b.c2.push_back(surfaces.b_fit[a]);
    }

    if (k == 1 && b.d > 1 && na >= b.d * (b.d + 1) / 2 + b.d) {
        const int d = b.d;
        const int nq = d * (d + 1) / 2;
        MatXd A1(na, d), A2(na, nq);
        MatXc y1(na, 1), y2(na, 1);
        for (int a = 0; a < na; ++a) {
            const VecXd& u = b.angles[a];
            A1.row(a) = u.transpose();
            int c = 0;
            for (int i = 0; i < d; ++i)
                for (int j = i; j < d; ++j)
                    A2(a, c++) = (i == j ? 1.0 : 2.0) * u(i) * u(j);
            y1(a) = b.c1[a](0);
            y2(a) = b.c2[a](0);
        }
        auto q1 = A1.colPivHouseholderQr();
        auto q2 = A2.colPivHouseholderQr();
        VecXc v = q1.solve(MatXd(y1.real())).cast<cplx>() + I * q1.solve(MatXd(y1.imag())).cast<cplx>();
        VecXc s = q2.solve(MatXd(y2.real())).cast<cplx>() + I * q2.solve(MatXd(y2.imag())).cast<cplx>();
        b.c1_form = v;
        b.c2_form.resize(d, d);
        int c = 0;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                b.c2_form(i, j) = b.c2_form(j, i) = s(c);
                ++c;
            }
        b.has_forms = true;
    }
    return b;
}

namespace {

void fft_nd(VecXc& data, int d, long N, bool inverse)
{
    long stride = 1;
    for (int a = 0; a < d; ++a) {
        VecXc line(N);
        long outer = data.size() / (stride * N);
        for (long o = 0; o < outer; ++o)
            for (long s = 0; s < stride; ++s) {
                long base = o * stride * N + s;
                for (long i = 0; i < N; ++i)
                    line(i) = data(base + i * stride);
                VecXc out = inverse ? ifft(line) : fft(line);
                for (long i = 0; i < N; ++i)
                    data(base + i * stride) = out(i);
            }
        stride *= N;
    }
}

} // namespace

ConvectionDiffusionWave convection_diffusion_wave(const WaveKernelBundle& bundle, double t, int points, double length)
{
    require(t > 0, "convection-diffusion wave needs t > 0");
    require(points >= 8 && points % 2 == 0 && length > 0, "box needs an even point count >= 8 and positive side");
    const int d = bundle.d;
    if (d > 3)
        fail(ErrorKind::NotApplicable, "kernel sampling is implemented for d <= 3");
    const int k = bundle.critical;
    const double dx = length / points;
    // narrowest diffusive width over the sampled angles
    double bmin = std::numeric_limits<double>::infinity();
    for (const auto& c2 : bundle.c2)
        for (long j = 0; j < c2.size(); ++j)
            bmin = std::min(bmin, -c2(j).real());
    if (!(bmin > 0))
        fail(ErrorKind::Resolution, "diffusive coefficients are not negative; the Gaussian part is undefined");
    double width = std::sqrt(2 * bmin * t);
    if (dx > 0.5 * width)
        fail(ErrorKind::Resolution, "grid spacing " + std::to_string(dx) + " does not resolve the Gaussian width "
                                        + std::to_string(width));
    if (pi / dx < 2 * bundle.eps)
        fail(ErrorKind::Resolution, "frequency box does not cover the cutoff support");

    long total = 1;
    for (int a = 0; a < d; ++a)
        total *= points;
    const int ent = k * k;
    MatXc gh(total, ent), wh(total, ent), kh(total, ent), kw(total, ent);
    parallel_for(static_cast<int>(total), [&](int p) {
        VecXd xi(d);
        long r = p;
        for (int a = 0; a < d; ++a) {
            long i = r % points;
            r /= points;
            long s = i < points / 2 ? i : i - points;
            xi(a) = 2 * pi * s / length;
        }
        MatXc G = bundle.g_hat(xi, t), Wm = bundle.w_hat(xi, t), Km = bundle.k_hat(xi, t);
        MatXc WK = Wm * Km, KW = Km * Wm;
        for (int e = 0; e < ent; ++e) {
            gh(p, e) = G(e / k, e % k);
            wh(p, e) = Wm(e / k, e % k);
            kh(p, e) = Km(e / k, e % k);
            kw(p, e) = KW(e / k, e % k) - WK(e / k, e % k);
        }
    });
    ConvectionDiffusionWave out;
    out.t = t;
    out.points = points;
    out.length = length;
    out.d = d;
    out.critical = k;
    const double scale = std::pow(points / length, d);
    auto to_space = [&](MatXc& m) {
        for (int e = 0; e < ent; ++e) {
            VecXc col = m.col(e);
            fft_nd(col, d, points, true);
            m.col(e) = col * scale;
        }
    };
    out.g = gh;
    out.W = wh;
    out.K = kh;
    to_space(out.g);
    to_space(out.W);
    to_space(out.K);

    // W * K on the periodic box, through the transforms of the sampled kernels
    auto to_freq = [&](const MatXc& m) {
        MatXc f = m;
        for (int e = 0; e < ent; ++e) {
            VecXc col = f.col(e);
            fft_nd(col, d, points, false);
            f.col(e) = col / scale;
        }
        return f;
    };
    MatXc Wf = to_freq(out.W), Kf = to_freq(out.K);
    MatXc conv(total, ent);
    for (long p = 0; p < total; ++p)
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                cplx s = 0;
                for (int l = 0; l < k; ++l)
                    s += Wf(p, i * k + l) * Kf(p, l * k + j);
                conv(p, i * k + j) = s;
            }
    to_space(conv);
    MatXc comm = kw;
    to_space(comm);
    double gmax = out.g.cwiseAbs().maxCoeff();
    out.convolution_error = (conv - out.g).cwiseAbs().maxCoeff() / gmax;
    out.commutation_error = comm.cwiseAbs().maxCoeff() / gmax;
    return out;
}

double g_dagger_norm(const WaveKernelBundle& bundle, const BallQuadrature& quad, double t)
{
    require(quad.d == bundle.d, "quadrature dimension does not match the bundle");
    double s = 0;
    for (size_t a = 0; a < quad.angles.size(); ++a)
        for (size_t r = 0; r < quad.radii.size(); ++r) {
            VecXd xi = quad.radii[r] * quad.angles[a];
            s += quad.angle_weights[a] * quad.radial_weights[r] * bundle.g_hat(xi, t).squaredNorm();
        }
    return std::sqrt(s / std::pow(2 * pi, bundle.d));
}

VecXc SeparableData::bloch(const VecXd& xi, int m, double X) const
{
    require(g.rows() % m == 0, "x1 profile must cover whole cells");
    const long c0 = std::lround(x1_origin / X);
    require(std::abs(c0 * X - x1_origin) < 1e-12 * X, "x1 origin must be a whole number of cells");
    require(static_cast<int>(transverse_hat.size()) == xi.size() - 1, "one transverse factor per direction");
    const int n = static_cast<int>(g.cols());
    const long cells = g.rows() / m;
    const double h = X / m;
    cplx tr = 1;
    for (long j = 1; j < xi.size(); ++j)
        tr *= transverse_hat[j - 1](xi(j));
    VecXc out = VecXc::Zero(static_cast<long>(n) * m);
    for (int q = 0; q < m; ++q)
        for (long c = 0; c < cells; ++c) {
            double x = q * h + (c0 + c) * X;
            cplx e = X * std::exp(-I * xi(0) * x) * tr;
            for (int comp = 0; comp < n; ++comp)
                out(comp * m + q) += e * g(q + c * m, comp);
        }
    return out;
}

std::function<cplx(double)> gaussian_hat(double sigma, double center)
{
    return [sigma, center](double z) {
        return sigma * std::sqrt(2 * pi) * std::exp(-0.5 * sigma * sigma * z * z) * std::exp(-I * z * center);
    };
}

std::function<cplx(double)> odd_gaussian_hat(double sigma)
{
    return [sigma](double z) {
        return -I * std::pow(sigma, 3) * z * std::sqrt(2 * pi) * std::exp(-0.5 * sigma * sigma * z * z);
    };
}

ResidualCurve asymptotic_residual(const ModelSpec& model, const WavePoint& wave, const WaveKernelBundle& bundle,
                                  const BallQuadrature& quad, const SeparableData& v0, const std::vector<double>& t,
                                  double t_fit_lo, double t_fit_hi)
{
    require(quad.d == bundle.d && wave.d == bundle.d, "dimensions of wave, bundle and quadrature differ");
    require(!t.empty(), "time grid is empty");
    BlochAssembler as(model, wave, bundle.m);
    const double h = as.h();
    const int k = bundle.critical;
    const int m = bundle.m;
    ResidualCurve rc;
    rc.t = t;
    rc.W = h * bundle.Pi_tilde.adjoint() * v0.bloch(VecXd::Zero(bundle.d), m, wave.X);
    double v0scale = std::sqrt(h) * v0.bloch(VecXd::Zero(bundle.d), m, wave.X).norm();
    if (!(rc.W.norm() > 1e-10 * std::max(v0scale, 1e-300))) {
        rc.relative_defined = false;
        rc.notes.push_back("zero modulated mass (W = 0); relative residual undefined, absolute residual reported");
    }

    const int na = static_cast<int>(quad.angles.size());
    const int nr = static_cast<int>(quad.radii.size());
    const int nt = static_cast<int>(t.size());
    // per-node contributions, summed afterwards in a fixed order
    std::vector<VecXd> res(na * nr, VecXd::Zero(nt)), ref(na * nr, VecXd::Zero(nt)), low(na * nr, VecXd::Zero(nt));
    parallel_for(na * nr, [&](int idx) {
        int a = idx / nr, r = idx % nr;
        VecXd xi = quad.radii[r] * quad.angles[a];
        double phi = cutoff(xi.norm(), bundle.eps);
        if (phi == 0)
            return;
        double w = quad.angle_weights[a] * quad.radial_weights[r] * h / wave.X;
        BlochSpectrum sp = spectrum(as(xi), h, true);
        std::vector<int> crit = nearest_cluster(sp.eigenvalues, k);
        VecXc vh = v0.bloch(xi, m, wave.X);
        for (int i = 0; i < nt; ++i) {
            VecXc sI = VecXc::Zero(vh.size());
            for (int c : crit) {
                cplx beta = h * sp.left.col(c).dot(vh);
                sI += phi * std::exp(sp.eigenvalues(c) * t[i]) * beta * sp.right.col(c);
            }
            VecXc gw = bundle.Pi * (bundle.g_hat(xi, t[i]) * rc.W);
            res[idx](i) = w * (sI - gw).squaredNorm();
            ref[idx](i) = w * gw.squaredNorm();
            low[idx](i) = w * sI.squaredNorm();
        }
    });
    const double fac = 1.0 / std::pow(2 * pi, bundle.d);
    for (int i = 0; i < nt; ++i) {
        double sr = 0, sg = 0, sl = 0;
        for (int idx = 0; idx < na * nr; ++idx) {
            sr += res[idx](i);
            sg += ref[idx](i);
            sl += low[idx](i);
        }
        rc.absolute.push_back(std::sqrt(fac * sr));
        rc.reference.push_back(std::sqrt(fac * sg));
        rc.low.push_back(std::sqrt(fac * sl));
        rc.relative.push_back(rc.relative_defined ? rc.absolute.back() / rc.reference.back()
                                                  : std::numeric_limits<double>::quiet_NaN());
    }
    rc.absolute_fit = fit_power(t, rc.absolute, t_fit_lo, t_fit_hi);
    rc.low_fit = fit_power(t, rc.low, t_fit_lo, t_fit_hi);
    if (rc.relative_defined)
        rc.relative_fit = fit_power(t, rc.relative, t_fit_lo, t_fit_hi);
    return rc;
}

} // namespace ptw
