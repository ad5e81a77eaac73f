#include "ptw/errors.hpp"
#include "ptw/fourier.hpp"
#include "ptw/parallel.hpp"
#include "ptw/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace ptw {

namespace {

void phi_functions(cplx z, cplx& e, cplx& p1, cplx& p2)
{
    e = std::exp(z);
    if (std::abs(z) < 1e-3) {
        p1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
        p2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
    } else {
        p1 = (e - 1.0) / z;
        p2 = (e - 1.0 - z) / (z * z);
    }
}

// Nonlinear remainder d/dx Q(v) of the perturbation equation about the wave.
class Remainder {
public:
    Remainder(const ModelSpec& model, const WavePoint& wave, const TorusGrid& g) : model_(model), g_(g)
    {
        MatXd u = resample(wave.samples, g.m);
        MatXd up = spectral_derivative(u, g.X);
        const long P = g.points();
        ubar_.resize(P, g.n);
        ubarx_.resize(P, g.n);
        for (long p = 0; p < P; ++p) {
            ubar_.row(p) = u.row(p % g.m);
            ubarx_.row(p) = up.row(p % g.m);
        }
    }

    MatXc operator()(const MatXd& v) const
    {
        const long P = g_.points();
        MatXd vx = torus_derivative(g_, v.cast<cplx>(), 0).real();
        MatXd Q(P, g_.n);
        for (long p = 0; p < P; ++p) {
            VecXd ub = ubar_.row(p).transpose(), ubx = ubarx_.row(p).transpose();
            VecXd vp = v.row(p).transpose(), vxp = vx.row(p).transpose();
            VecXd u = ub + vp;
            VecXd q = -(model_.f(0, u) - model_.f(0, ub) - model_.Df(0, ub) * vp);
            if (!model_.constant_viscosity)
                q += (model_.B(0, 0, u) - model_.B(0, 0, ub)) * (ubx + vxp) - model_.DB(0, 0, ub, vp) * ubx;
            Q.row(p) = q.transpose();
        }
        return torus_derivative(g_, Q.cast<cplx>(), 0);
    }

private:
    const ModelSpec& model_;
    TorusGrid g_;
    MatXd ubar_, ubarx_;
};

double h1_norm(const TorusGrid& g, const MatXd& v)
{
    MatXc vx = torus_derivative(g, v.cast<cplx>(), 0);
    return std::sqrt(std::pow(l2_norm(g, v.cast<cplx>()), 2) + std::pow(l2_norm(g, vx), 2));
}

} // namespace

EnergyFit fit_energy(const std::vector<double>& t, const std::vector<double>& h1, const std::vector<double>& l2)
{
    require(t.size() == h1.size() && t.size() == l2.size() && t.size() >= 2, "energy fit needs matching series");
    EnergyFit best;
    best.C = std::numeric_limits<double>::infinity();
    const double h0 = h1[0] * h1[0];
    if (h0 == 0) {
        // zero data stays zero
        bool zero = std::all_of(h1.begin(), h1.end(), [](double v) { return v == 0; });
        best.C = zero ? 1 : std::numeric_limits<double>::infinity();
        best.theta1 = best.theta2 = 1;
        best.pass = zero;
        return best;
    }
    const int K = 31;
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            double th1 = std::pow(10.0, -4 + 5.0 * a / (K - 1));
            double th2 = std::pow(10.0, -4 + 5.0 * b / (K - 1));
            double integral = 0, C = 0;
            for (size_t i = 0; i < t.size(); ++i) {
                if (i > 0) {
                    double dt = t[i] - t[i - 1];
                    double e = std::exp(-th2 * dt);
                    integral = e * integral + 0.5 * dt * (e * l2[i - 1] * l2[i - 1] + l2[i] * l2[i]);
                }
                double rhs = std::exp(-th1 * (t[i] - t[0])) * h0 + integral;
                C = std::max(C, h1[i] * h1[i] / rhs);
            }
            // ties go to the larger rates
            if (C <= best.C * (1 + 1e-12)) {
                best.C = C;
                best.theta1 = th1;
                best.theta2 = th2;
            }
        }
    best.pass = best.C <= 1e3 && best.theta1 > 0 && best.theta2 > 0;
    return best;
}

Trajectory nonlinear_evolve(const ModelSpec& model, const WavePoint& wave, const TorusGrid& grid, const MatXd& v0,
                            const NonlinearOptions& opt)
{
    if (grid.d != 1 || model.d != 1)
        fail(ErrorKind::NotApplicable, "nonlinear evolution is implemented on d = 1 tori");
    require(!opt.t_out.empty() && std::is_sorted(opt.t_out.begin(), opt.t_out.end()) && opt.t_out.front() >= 0,
            "output times must be sorted and nonnegative");
    require(v0.rows() == grid.points() && v0.cols() == grid.n, "initial perturbation does not match the grid");
    H1Report h1r = check_h1(model, [&] {
        std::vector<VecXd> s;
        for (int i = 0; i < wave.m(); ++i)
            s.push_back(wave.samples.row(i).transpose());
        return s;
    }());
    if (!h1r.pass)
        fail(ErrorKind::NotApplicable, "model is not uniformly elliptic along the wave");

    LinearSemigroup S(model, wave, grid, opt.eps);
    if (S.defective_nodes() > 0)
        fail(ErrorKind::NotApplicable, "defective frequency nodes; the modal integrator needs diagonalizable L_xi");
    Remainder Nphys(model, wave, grid);
    const int nodes = grid.nodes();
    const long N = static_cast<long>(grid.n) * grid.m;

    auto to_physical = [&](const MatXc& y) {
        BlochField f;
        f.grid = grid;
        f.coeff.resize(N, nodes);
        for (int k = 0; k < nodes; ++k)
            f.coeff.col(k) = S.node(k).V * y.col(k);
        return MatXd(bloch_inverse(f).real());
    };
    auto field_norm = [&](const MatXc& y) {
        BlochField f;
        f.grid = grid;
        f.coeff.resize(N, nodes);
        for (int k = 0; k < nodes; ++k)
            f.coeff.col(k) = S.node(k).V * y.col(k);
        return f.norm();
    };
    auto nonlinear = [&](const MatXc& y) { return S.modal(bloch_forward(grid, Nphys(to_physical(y)))); };

    Trajectory tr;
    MatXc y = S.modal(bloch_forward(grid, v0.cast<cplx>()));
    double t = 0, h = opt.h0;
    double eta = 0;
    auto record = [&](double tt, const MatXd& v) {
        double l2 = l2_norm(grid, v.cast<cplx>());
        double h1 = h1_norm(grid, v);
        eta = std::max(eta, l2 * std::pow(1 + tt, 0.25));
        tr.t.push_back(tt);
        tr.l2.push_back(l2);
        tr.h1.push_back(h1);
        tr.eta.push_back(eta);
        if (opt.keep_snapshots)
            tr.snapshots.push_back(v);
        return h1;
    };

    MatXc E(N, nodes), P1(N, nodes), P2(N, nodes);
    double h_cached = -1;
    auto prepare = [&](double hh) {
        if (hh == h_cached)
            return;
        for (int k = 0; k < nodes; ++k)
            for (long i = 0; i < N; ++i) {
                cplx e, p1, p2;
                phi_functions(S.node(k).lambda(i) * hh, e, p1, p2);
                E(i, k) = e;
                P1(i, k) = p1;
                P2(i, k) = p2;
            }
        h_cached = hh;
    };

    size_t next = 0;
    while (next < opt.t_out.size() && opt.t_out[next] <= t) {
        if (record(opt.t_out[next], to_physical(y)) > opt.smallness) {
            tr.aborted = true;
            tr.note = "initial H1 norm exceeds the smallness bound";
            return tr;
        }
        ++next;
    }
    MatXc Nn = nonlinear(y);
    while (next < opt.t_out.size()) {
        double target = opt.t_out[next];
        double hh = std::min({h, opt.hmax, target - t});
        prepare(hh);
        MatXc a = E.cwiseProduct(y) + hh * P1.cwiseProduct(Nn);
        MatXc Na = nonlinear(a);
        MatXc corr = hh * P2.cwiseProduct(Na - Nn);
        double err = field_norm(corr);
        double tol = opt.rtol * std::max(field_norm(y), opt.atol);
        if (err <= tol || hh < 1e-10) {
            y = a + corr;
            t += hh;
            ++tr.steps;
            Nn = nonlinear(y);
            if (std::abs(t - target) < 1e-12 * std::max(1.0, target)) {
                t = target;
                MatXd v = to_physical(y);
                if (record(t, v) > opt.smallness) {
                    tr.aborted = true;
                    tr.note = "H1 norm exceeded the smallness bound at t = " + std::to_string(t);
                    break;
                }
                ++next;
            }
        } else {
            ++tr.rejected;
        }
        bool accepted = err <= tol || hh < 1e-10;
        double fac = err > 0 ? 0.9 * std::sqrt(tol / err) : 2.0;
        double hnew = hh * std::clamp(fac, 0.2, 2.0);
        // a step shortened to land on an output time does not shrink the next one
        h = accepted && hh < h ? std::max(hnew, h) : hnew;
    }
    if (tr.t.size() >= 2)
        tr.energy = fit_energy(tr.t, tr.h1, tr.l2);
    return tr;
}

void write_snapshot(const std::string& path, const TorusGrid& g, double t, const MatXd& u)
{
    require(u.rows() == g.points() && u.cols() == g.n, "snapshot does not match the grid");
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorKind::Io, "cannot write snapshot " + path);
    const int32_t hdr[5] = {g.d, g.n, g.m, g.cells, g.nt};
    const double dh[3] = {g.X, g.Lt, t};
    os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    os.write(reinterpret_cast<const char*>(dh), sizeof dh);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = u;
    os.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!os)
        fail(ErrorKind::Io, "short write to " + path);
}

MatXd read_snapshot(const std::string& path, TorusGrid& g, double& t)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(ErrorKind::Io, "cannot read snapshot " + path);
    int32_t hdr[5];
    double dh[3];
    is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    is.read(reinterpret_cast<char*>(dh), sizeof dh);
    if (!is)
        fail(ErrorKind::Io, "truncated snapshot header in " + path);
    g.d = hdr[0];
    g.n = hdr[1];
    g.m = hdr[2];
    g.cells = hdr[3];
    g.nt = hdr[4];
    g.X = dh[0];
    g.Lt = dh[1];
    t = dh[2];
    g.validate();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(g.points(), g.n);
    is.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!is)
        fail(ErrorKind::Io, "truncated snapshot data in " + path);
    return rm;
}

} // namespace ptw
