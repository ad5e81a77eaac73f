#include "ptw/semigroup.hpp"

#include "ptw/errors.hpp"
#include "ptw/fourier.hpp"
#include "ptw/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace ptw {

namespace {

int signed_index(int k, int N) { return k < N / 2 ? k : k - N; }

long ipow(long b, int e)
{
    long r = 1;
    for (int i = 0; i < e; ++i)
        r *= b;
    return r;
}

// FFT along one axis of a row-major array with the given dimensions (axis 0 fastest).
void fft_axis(VecXc& data, const std::vector<long>& dims, int axis, bool inverse)
{
    long stride = 1;
    for (int a = 0; a < axis; ++a)
        stride *= dims[a];
    const long len = dims[axis];
    const long outer = data.size() / (stride * len);
    VecXc line(len);
    for (long o = 0; o < outer; ++o)
        for (long s = 0; s < stride; ++s) {
            long base = o * stride * len + s;
            for (long i = 0; i < len; ++i)
                line(i) = data(base + i * stride);
            VecXc out = inverse ? ifft(line) : fft(line);
            for (long i = 0; i < len; ++i)
                data(base + i * stride) = out(i);
        }
}

std::vector<long> box_dims(const TorusGrid& g)
{
    std::vector<long> dims{g.line()};
    for (int j = 1; j < g.d; ++j)
        dims.push_back(g.nt);
    return dims;
}

} // namespace

long TorusGrid::transverse_points() const { return ipow(nt, d - 1); }

double TorusGrid::cell_volume() const { return h() * std::pow(ht(), d - 1); }

double TorusGrid::xi_weight() const
{
    double w = 2 * pi / (cells * X);
    for (int j = 1; j < d; ++j)
        w *= 2 * pi / Lt;
    return w;
}

VecXd TorusGrid::xi(int node) const
{
    VecXd xi(d);
    int j = node % cells;
    long K = node / cells;
    xi(0) = 2 * pi * signed_index(j, cells) / (cells * X);
    for (int a = 1; a < d; ++a) {
        xi(a) = 2 * pi * signed_index(static_cast<int>(K % nt), nt) / Lt;
        K /= nt;
    }
    return xi;
}

VecXd TorusGrid::coords(long p) const
{
    VecXd x(d);
    x(0) = (p % line()) * h();
    long K = p / line();
    for (int a = 1; a < d; ++a) {
        x(a) = (K % nt) * ht();
        K /= nt;
    }
    return x;
}

void TorusGrid::validate() const
{
    require(d >= 1 && n >= 1, "grid dimension and component count must be positive");
    if (m < 4 || m % 2 != 0)
        fail(ErrorKind::Domain, "cell resolution m must be even and >= 4, got " + std::to_string(m));
    if (cells < 2 || cells % 2 != 0)
        fail(ErrorKind::Domain, "number of cells must be even and >= 2, got " + std::to_string(cells));
    if (d > 1 && (nt < 2 || nt % 2 != 0 || !(Lt > 0)))
        fail(ErrorKind::Domain, "transverse torus needs an even point count and positive side");
    require(X > 0, "cell length must be positive");
}

TorusGrid TorusGrid::make(const WavePoint& wave, int cells, int m, int nt, double Lt)
{
    TorusGrid g;
    g.d = wave.d;
    g.n = wave.n;
    g.m = m;
    g.cells = cells;
    g.nt = wave.d > 1 ? nt : 1;
    g.Lt = wave.d > 1 ? Lt : 1;
    g.X = wave.X;
    g.validate();
    return g;
}

double BlochField::norm() const
{
    const double fac = grid.xi_weight() * grid.h() / grid.X / std::pow(2 * pi, grid.d);
    return std::sqrt(fac * coeff.squaredNorm());
}

BlochField bloch_forward(const TorusGrid& g, const MatXc& u)
{
    g.validate();
    if (u.rows() != g.points() || u.cols() != g.n)
        fail(ErrorKind::Domain, "field has " + std::to_string(u.rows()) + "x" + std::to_string(u.cols())
                                    + " samples; the grid requires " + std::to_string(g.points()) + "x"
                                    + std::to_string(g.n) + " (cells*m per x1 line times nt^(d-1))");
    const std::vector<long> dims = box_dims(g);
    const long M1 = g.line();
    const long T = g.transverse_points();
    BlochField f;
    f.grid = g;
    f.coeff.resize(static_cast<long>(g.n) * g.m, g.nodes());
    for (int c = 0; c < g.n; ++c) {
        VecXc data = u.col(c);
        for (int a = 1; a < g.d; ++a)
            fft_axis(data, dims, a, false);
        data *= std::pow(g.ht(), g.d - 1);
        for (long K = 0; K < T; ++K)
            for (int q = 0; q < g.m; ++q) {
                VecXc s(g.cells);
                for (int cc = 0; cc < g.cells; ++cc)
                    s(cc) = data(q + cc * g.m + M1 * K);
                VecXc S = fft(s);
                double xq = q * g.h();
                for (int j = 0; j < g.cells; ++j) {
                    double xi1 = 2 * pi * signed_index(j, g.cells) / (g.cells * g.X);
                    f.coeff(c * g.m + q, j + g.cells * K) = g.X * std::exp(-I * xi1 * xq) * S(j);
                }
            }
    }
    return f;
}

MatXc bloch_inverse(const BlochField& f)
{
    const TorusGrid& g = f.grid;
    const std::vector<long> dims = box_dims(g);
    const long M1 = g.line();
    const long T = g.transverse_points();
    MatXc u(g.points(), g.n);
    for (int c = 0; c < g.n; ++c) {
        VecXc data(g.points());
        for (long K = 0; K < T; ++K)
            for (int q = 0; q < g.m; ++q) {
                double xq = q * g.h();
                VecXc s(g.cells);
                for (int j = 0; j < g.cells; ++j) {
                    double xi1 = 2 * pi * signed_index(j, g.cells) / (g.cells * g.X);
                    s(j) = std::exp(I * xi1 * xq) * f.coeff(c * g.m + q, j + g.cells * K) / g.X;
                }
                VecXc S = ifft(s);
                for (int cc = 0; cc < g.cells; ++cc)
                    data(q + cc * g.m + M1 * K) = S(cc);
            }
        for (int a = 1; a < g.d; ++a)
            fft_axis(data, dims, a, true);
        data /= std::pow(g.ht(), g.d - 1);
        u.col(c) = data;
    }
    return u;
}

double l2_norm(const TorusGrid& g, const MatXc& u) { return std::sqrt(g.cell_volume() * u.squaredNorm()); }

double lp_norm(const TorusGrid& g, const MatXc& u, double p)
{
    if (std::isinf(p))
        return u.rowwise().norm().maxCoeff();
    if (p == 2)
        return l2_norm(g, u);
    require(p >= 1, "p must be >= 1");
    double s = 0;
    for (long i = 0; i < u.rows(); ++i)
        s += std::pow(u.row(i).norm(), p);
    return std::pow(g.cell_volume() * s, 1.0 / p);
}

MatXc torus_derivative(const TorusGrid& g, const MatXc& u, int axis)
{
    require(axis >= 0 && axis < g.d, "derivative axis out of range");
    const std::vector<long> dims = box_dims(g);
    const long len = dims[axis];
    const double side = axis == 0 ? g.cells * g.X : g.Lt;
    MatXc out(u.rows(), u.cols());
    long stride = 1;
    for (int a = 0; a < axis; ++a)
        stride *= dims[a];
    for (long c = 0; c < u.cols(); ++c) {
        VecXc data = u.col(c);
        fft_axis(data, dims, axis, false);
        for (long p = 0; p < data.size(); ++p) {
            long k = (p / stride) % len;
            long sk = k < len / 2 ? k : k - len;
            if (2 * k == len)
                sk = 0;
            data(p) *= I * (2 * pi * sk / side);
        }
        fft_axis(data, dims, axis, true);
        out.col(c) = data;
    }
    return out;
}

MatXc pad_grid(const TorusGrid& from, const TorusGrid& to, const MatXc& u)
{
    require(from.d == to.d && from.n == to.n && from.m == to.m && from.X == to.X, "incompatible grids");
    require(to.cells >= from.cells && to.nt >= from.nt, "target grid must be larger");
    if (from.d > 1)
        require(std::abs(to.ht() - from.ht()) < 1e-12 * from.ht(), "transverse spacing must agree");
    MatXc out = MatXc::Zero(to.points(), to.n);
    for (long p = 0; p < from.points(); ++p) {
        long i1 = p % from.line();
        long K = p / from.line();
        long q = i1, mult = to.line();
        for (int a = 1; a < from.d; ++a) {
            q += (K % from.nt) * mult;
            K /= from.nt;
            mult *= to.nt;
        }
        out.row(q) = u.row(p);
    }
    return out;
}

double cutoff(double r, double eps)
{
    if (r <= eps)
        return 1.0;
    if (r >= 2 * eps)
        return 0.0;
    auto g = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
    double sigma = (r - eps) / eps;
    double a = g(1 - sigma), b = g(sigma);
    return a / (a + b);
}

Split parse_split(const std::string& s)
{
    if (s == "full")
        return Split::Full;
    if (s == "S_I" || s == "low")
        return Split::Low;
    if (s == "S_II" || s == "high")
        return Split::High;
    fail(ErrorKind::Config, "unknown split '" + s + "' (expected full, S_I or S_II)");
}

std::string to_string(Split s)
{
    switch (s) {
    case Split::Full:
        return "full";
    case Split::Low:
        return "S_I";
    case Split::High:
        return "S_II";
    }
    return "full";
}

MatXc contour_projector(const MatXc& L, double radius, int points)
{
    const long N = L.rows();
    MatXc P = MatXc::Zero(N, N);
    MatXc Id = MatXc::Identity(N, N);
    for (int k = 0; k < points; ++k) {
        cplx z = radius * std::exp(I * (2 * pi * (k + 0.5) / points));
        P += z * (z * Id - L).partialPivLu().inverse();
    }
    return P / static_cast<double>(points);
}

NodeSpectrum node_spectrum(const MatXc& L, const VecXd& xi, int ncrit, double eps, double cond_max)
{
    NodeSpectrum ns;
    ns.xi = xi;
    ns.phi = cutoff(xi.norm(), eps);
    Eigen::ComplexEigenSolver<MatXc> es(L, true);
    if (es.info() != Eigen::Success)
        fail(ErrorKind::Numerical, "dense eigensolver failed");
    ns.lambda = es.eigenvalues();
    ns.V = es.eigenvectors();
    Eigen::PartialPivLU<MatXc> lu(ns.V);
    ns.Vinv = lu.inverse();
    double cond = ns.V.cwiseAbs().colwise().sum().maxCoeff() * ns.Vinv.cwiseAbs().colwise().sum().maxCoeff();
    if (ns.phi > 0)
        ns.critical = nearest_cluster(ns.lambda, ncrit);
    if (!(cond < cond_max)) {
        ns.defective = true;
        ns.L = L;
        if (ns.phi > 0) {
            std::vector<double> mags(ns.lambda.size());
            for (long i = 0; i < ns.lambda.size(); ++i)
                mags[i] = std::abs(ns.lambda(i));
            std::sort(mags.begin(), mags.end());
            double inner = mags[ncrit - 1], outer = mags[ncrit];
            ns.P = contour_projector(L, std::sqrt(std::max(inner, 1e-300) * outer));
        }
    }
    return ns;
}

LinearSemigroup::LinearSemigroup(const ModelSpec& model, const WavePoint& wave, const TorusGrid& grid, double eps)
    : grid_(grid), ncrit_(wave.critical_count()), eps_(eps)
{
    grid.validate();
    require(grid.d == wave.d && grid.n == wave.n && std::abs(grid.X - wave.X) < 1e-14 * wave.X,
            "grid does not match the wave (d, n, X)");
    require(eps > 0, "cutoff radius must be positive");
    BlochAssembler as(model, wave, grid.m);
    warnings_ = as.warnings();
    nodes_.resize(grid.nodes());
    parallel_for(grid.nodes(), [&](int k) {
        VecXd xi = grid_.xi(k);
        nodes_[k] = node_spectrum(as(xi), xi, ncrit_, eps_);
    });
    int nd = defective_nodes();
    if (nd > 0)
        warnings_.push_back(std::to_string(nd) + " defective frequency nodes use the matrix exponential fallback");
}

int LinearSemigroup::defective_nodes() const
{
    int c = 0;
    for (const auto& nsp : nodes_)
        c += nsp.defective;
    return c;
}

MatXc LinearSemigroup::modal(const BlochField& f) const
{
    require(f.coeff.cols() == grid_.nodes(), "Bloch field does not match the semigroup grid");
    MatXc y(f.coeff.rows(), f.coeff.cols());
    for (int k = 0; k < grid_.nodes(); ++k)
        y.col(k) = nodes_[k].defective ? VecXc(f.coeff.col(k)) : VecXc(nodes_[k].Vinv * f.coeff.col(k));
    return y;
}

BlochField LinearSemigroup::synthesize(const MatXc& y, double t, Split split) const
{
    require(t >= 0, "time must be nonnegative");
    BlochField f;
    f.grid = grid_;
    f.coeff.resize(y.rows(), y.cols());
    parallel_for(grid_.nodes(), [&](int k) {
        const NodeSpectrum& ns = nodes_[k];
        if (ns.defective) {
            MatXc E = (ns.L * cplx(t)).exp();
            VecXc full = E * y.col(k);
            if (split == Split::Full || ns.phi == 0)
                f.coeff.col(k) = split == Split::Low ? VecXc::Zero(y.rows()) : full;
            else {
                VecXc low = ns.phi * (ns.P * full);
                f.coeff.col(k) = split == Split::Low ? low : VecXc(full - low);
            }
            return;
        }
        VecXc w(y.rows());
        for (long i = 0; i < w.size(); ++i)
            w(i) = std::exp(ns.lambda(i) * t) * y(i, k) * (split == Split::Low ? 0.0 : 1.0);
        if (split != Split::Full)
            for (int i : ns.critical) {
                double wt = split == Split::Low ? ns.phi : 1 - ns.phi;
                w(i) = std::exp(ns.lambda(i) * t) * y(i, k) * wt;
            }
        f.coeff.col(k) = ns.V * w;
    });
    return f;
}

BlochField LinearSemigroup::apply(const BlochField& f, double t, Split split) const
{
    return synthesize(modal(f), t, split);
}

MatXc LinearSemigroup::evolve(const MatXc& u0, double t, Split split) const
{
    return bloch_inverse(apply(bloch_forward(grid_, u0), t, split));
}

double LinearSemigroup::high_gap(const BlochField& data, double weight_floor) const
{
    MatXc y = modal(data);
    double scale = 0;
    for (int k = 0; k < grid_.nodes(); ++k)
        for (long i = 0; i < y.rows(); ++i)
            scale = std::max(scale, std::abs(y(i, k)) * (nodes_[k].defective ? 1.0 : nodes_[k].V.col(i).norm()));
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_.nodes(); ++k) {
        const NodeSpectrum& ns = nodes_[k];
        for (long i = 0; i < y.rows(); ++i) {
            double wt = 1;
            if (std::find(ns.critical.begin(), ns.critical.end(), static_cast<int>(i)) != ns.critical.end())
                wt = 1 - ns.phi;
            double amp = wt * std::abs(y(i, k)) * (ns.defective ? 1.0 : ns.V.col(i).norm());
            if (amp > weight_floor * scale)
                gap = std::min(gap, -ns.lambda(i).real());
        }
    }
    return gap;
}

double LinearSemigroup::max_real_part() const
{
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& ns : nodes_)
        mx = std::max(mx, ns.lambda.real().maxCoeff());
    return mx;
}

PowerFit fit_power(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi)
{
    std::vector<double> xs, ys;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_lo && t[i] <= t_hi && y[i] > 0) {
            xs.push_back(std::log1p(t[i]));
            ys.push_back(std::log(y[i]));
        }
    PowerFit f;
    f.t_lo = t_lo;
    f.t_hi = t_hi;
    f.points = static_cast<int>(xs.size());
    if (f.points < 2) {
        f.exponent = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    const int N = f.points;
    MatXd A(N, 2);
    VecXd b(N);
    for (int i = 0; i < N; ++i) {
        A(i, 0) = 1;
        A(i, 1) = xs[i];
        b(i) = ys[i];
    }
    VecXd c = A.colPivHouseholderQr().solve(b);
    f.prefactor = std::exp(c(0));
    f.exponent = c(1);
    if (N > 2) {
        double s2 = (A * c - b).squaredNorm() / (N - 2);
        MatXd cov = s2 * (A.transpose() * A).inverse();
        f.stderr_ = std::sqrt(cov(1, 1));
    }
    return f;
}

namespace {

TorusGrid doubled(const TorusGrid& g)
{
    TorusGrid h = g;
    h.cells *= 2;
    if (g.d > 1) {
        h.nt *= 2;
        h.Lt *= 2;
    }
    return h;
}

std::vector<std::vector<double>> decay_norms(const LinearSemigroup& S, const MatXd& u0, const std::vector<double>& t,
                                             const DecayOptions& opt)
{
    MatXc data = u0.cast<cplx>();
    for (int k = 0; k < opt.derivative; ++k)
        data = torus_derivative(S.grid(), data, 0);
    MatXc y = S.modal(bloch_forward(S.grid(), data));
    std::vector<std::vector<double>> out(opt.p_list.size(), std::vector<double>(t.size()));
    for (size_t i = 0; i < t.size(); ++i) {
        MatXc u = bloch_inverse(S.synthesize(y, t[i], opt.split));
        for (size_t p = 0; p < opt.p_list.size(); ++p)
            out[p][i] = lp_norm(S.grid(), u, opt.p_list[p]);
    }
    return out;
}

} // namespace

DecayMeasurement measure_decay(const ModelSpec& model, const WavePoint& wave, const TorusGrid& grid,
                               const MatXd& u0, const std::vector<double>& t, const DecayOptions& opt)
{
    require(!t.empty() && std::is_sorted(t.begin(), t.end()) && t.front() >= 0, "time grid must be sorted and >= 0");
    DecayMeasurement dm;
    dm.t = t;
    dm.p_list = opt.p_list;
    LinearSemigroup S(model, wave, grid, opt.eps);
    dm.notes = S.warnings();
    dm.norms = decay_norms(S, u0, t, opt);

    TorusGrid g2 = doubled(grid);
    LinearSemigroup S2(model, wave, g2, opt.eps);
    auto ref = decay_norms(S2, pad_grid(grid, g2, u0.cast<cplx>()).real(), t, opt);

    dm.t_wrap = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < t.size() && std::isinf(dm.t_wrap); ++i)
        for (size_t p = 0; p < opt.p_list.size(); ++p)
            if (std::abs(dm.norms[p][i] - ref[p][i]) > opt.wrap_tol * ref[p][i]) {
                dm.t_wrap = t[i];
                break;
            }
    double hi = t.back();
    if (!std::isinf(dm.t_wrap)) {
        dm.truncated = true;
        auto it = std::lower_bound(t.begin(), t.end(), dm.t_wrap);
        hi = it == t.begin() ? t.front() : *(it - 1);
        dm.notes.push_back("wrap-around detected at t = " + std::to_string(dm.t_wrap) + "; fit window truncated");
    }
    for (size_t p = 0; p < opt.p_list.size(); ++p)
        dm.fits.push_back(fit_power(t, dm.norms[p], opt.t_fit_min, hi));
    return dm;
}

HighFreqDecay high_freq_decay(const LinearSemigroup& S, const MatXd& u0, const std::vector<double>& t,
                              double fit_from, double weight_floor)
{
    BlochField f = bloch_forward(S.grid(), u0.cast<cplx>());
    MatXc y = S.modal(f);
    HighFreqDecay hf;
    hf.t = t;
    hf.initial = f.norm();
    require(hf.initial > 0, "initial data must be nonzero");
    for (double ti : t) {
        double v = S.synthesize(y, ti, Split::High).norm();
        hf.norms.push_back(v);
        hf.max_ratio = std::max(hf.max_ratio, v / hf.initial);
    }
    // late-time exponential rate from the second half of the fit range
    std::vector<double> xs, ys;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= fit_from && hf.norms[i] > 0)
            xs.push_back(t[i]), ys.push_back(std::log(hf.norms[i]));
    require(xs.size() >= 4, "need at least four times beyond fit_from");
    size_t start = xs.size() / 2;
    MatXd A(xs.size() - start, 2);
    VecXd b(xs.size() - start);
    for (size_t i = start; i < xs.size(); ++i) {
        A(i - start, 0) = 1;
        A(i - start, 1) = xs[i];
        b(i - start) = ys[i];
    }
    VecXd c = A.colPivHouseholderQr().solve(b);
    hf.theta = -c(1);
    hf.gap = S.high_gap(f, weight_floor);
    return hf;
}

ModelSpec restrict_to_axis(const ModelSpec& model)
{
    ModelSpec r = model;
    r.d = 1;
    r.id = model.id + "_x1";
    auto f = model.flux;
    auto B = model.viscosity;
    r.flux = [f](int, const VecXd& u) { return f(0, u); };
    r.viscosity = [B](int, int, const VecXd& u) { return B(0, 0, u); };
    if (model.flux_jacobian) {
        auto J = model.flux_jacobian;
        r.flux_jacobian = [J](int, const VecXd& u) { return J(0, u); };
    }
    if (model.viscosity_derivative) {
        auto D = model.viscosity_derivative;
        r.viscosity_derivative = [D](int, int, const VecXd& u, const VecXd& v) { return D(0, 0, u, v); };
    }
    return r;
}

SeparableBaseline::SeparableBaseline(const ModelSpec& model, const WavePoint& wave) : d_(model.d)
{
    require(wave.d == model.d && wave.n == model.n, "wave does not match the model");
    require(wave.nu.size() == model.d && std::abs(wave.nu(0) - 1) < 1e-14, "separable baselines need nu = e1");
    const int n = model.n;
    std::vector<VecXd> states;
    for (int i = 0; i < wave.m(); ++i)
        states.push_back(wave.samples.row(i).transpose());
    auto scalar_multiple = [&](const MatXd& M) {
        double c = M.trace() / n;
        return (M - c * MatXd::Identity(n, n)).norm() <= 1e-12 * (1 + std::abs(c));
    };
    auto constant = [&](auto eval) {
        MatXd ref = eval(states[0]);
        for (const auto& s : states)
            if ((eval(s) - ref).norm() > 1e-12 * (1 + ref.norm()))
                return false;
        return true;
    };
    for (int j = 1; j < d_; ++j) {
        auto Df = [&](const VecXd& u) { return model.Df(j, u); };
        auto Bjj = [&](const VecXd& u) { return model.B(j, j, u); };
        if (!constant(Df) || !constant(Bjj) || !scalar_multiple(Df(states[0])) || !scalar_multiple(Bjj(states[0])))
            fail(ErrorKind::NotApplicable, "transverse direction " + std::to_string(j)
                                               + " is not a constant scalar-multiple coefficient");
        for (int k = 0; k < d_; ++k)
            if (k != j)
                for (const auto& s : states)
                    if (model.B(j, k, s).norm() > 1e-14 || model.B(k, j, s).norm() > 1e-14)
                        fail(ErrorKind::NotApplicable, "cross viscosity couples transverse directions");
        transverse_.push_back(constant_coefficient({Df(states[0])}, {Bjj(states[0])}));
    }
    axial_ = restrict_to_axis(model);
    axial_wave_ = wave;
    axial_wave_.d = 1;
    axial_wave_.nu = VecXd::Ones(1);
    axial_wave_.F = wave.F.col(0);
}

DecayMeasurement SeparableBaseline::decay(const TorusGrid& axial, const MatXd& g, const TorusGrid& line,
                                          const std::vector<MatXd>& G, const std::vector<double>& t,
                                          const DecayOptions& opt) const
{
    require(static_cast<int>(G.size()) == d_ - 1, "one transverse profile per transverse direction");
    DecayMeasurement dm = measure_decay(axial_, axial_wave_, axial, g, t, opt);
    for (int j = 1; j < d_; ++j) {
        WavePoint cst = WavePoint::constant(transverse_[j - 1], VecXd::Zero(transverse_[j - 1].n), line.X, line.m);
        DecayOptions o = opt;
        o.derivative = 0;
        DecayMeasurement f = measure_decay(transverse_[j - 1], cst, line, G[j - 1], t, o);
        for (size_t p = 0; p < dm.norms.size(); ++p)
            for (size_t i = 0; i < t.size(); ++i)
                dm.norms[p][i] *= f.norms[p][i];
        dm.t_wrap = std::min(dm.t_wrap, f.t_wrap);
        for (auto& s : f.notes)
            dm.notes.push_back("transverse " + std::to_string(j) + ": " + s);
    }
    double hi = t.back();
    if (!std::isinf(dm.t_wrap)) {
        dm.truncated = true;
        auto it = std::lower_bound(t.begin(), t.end(), dm.t_wrap);
        hi = it == t.begin() ? t.front() : *(it - 1);
    }
    dm.fits.clear();
    for (size_t p = 0; p < dm.norms.size(); ++p)
        dm.fits.push_back(fit_power(t, dm.norms[p], opt.t_fit_min, hi));
    return dm;
}

} // namespace ptw
