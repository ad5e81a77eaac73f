// ptwlab: command-line front end for the periodic traveling wave stability lab.

#include "ptw/acceptance.hpp"
#include "ptw/bloch.hpp"
#include "ptw/errors.hpp"
#include "ptw/evans.hpp"
#include "ptw/homogenized.hpp"
#include "ptw/io.hpp"
#include "ptw/parallel.hpp"
#include "ptw/semigroup.hpp"

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#ifndef PTW_VERSION
#define PTW_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace ptw;

namespace {

int verbosity = 0;

double now()
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// one JSON object per line on stderr
void emit(int level, const std::string& stage, const std::string& msg, json extra = json::object())
{
    if (level > verbosity)
        return;
    static const char* names[] = {"info", "debug", "trace"};
    json j;
    j["level"] = names[std::min(level, 2)];
    j["stage"] = stage;
    j["msg"] = msg;
    for (auto& [k, v] : extra.items())
        j[k] = v;
    std::cerr << j.dump() << "\n";
}

class Run {
public:
    Run(RunConfig cfg, std::string command) : cfg_(std::move(cfg)), command_(std::move(command))
    {
        fs::create_directories(cfg_.out);
        write_text(path("config.toml"), serialize_config(cfg_));
    }

    const RunConfig& cfg() const { return cfg_; }
    std::string path(const std::string& name) const { return (fs::path(cfg_.out) / name).string(); }

    template <typename F>
    auto stage(const std::string& name, F&& f)
    {
        emit(0, name, "start");
        double t0 = now();
        auto finish = [&] {
            double dt = now() - t0;
            stages_.push_back({{"name", name}, {"seconds", dt}});
            emit(0, name, "done", {{"seconds", dt}});
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    }

    void output(const std::string& name) { outputs_.push_back(name); }
    void save_json(const std::string& name, const json& j)
    {
        write_json(path(name), j);
        output(name);
    }
    void save_csv(const std::string& name, const CsvWriter& w)
    {
        w.save(path(name));
        output(name);
    }
    void check(const std::string& name, bool pass) { checks_.push_back({{"name", name}, {"pass", pass}}); }
    bool all_pass() const
    {
        for (const auto& c : checks_)
            if (!c["pass"].get<bool>())
                return false;
        return true;
    }

    void finish(int exit_code)
    {
        json m;
        m["command"] = command_;
        m["version"] = PTW_VERSION;
        m["config_hash"] = config_hash(cfg_);
        m["threads"] = thread_count();
        m["stages"] = stages_;
        m["checks"] = checks_;
        m["outputs"] = outputs_;
        m["exit_code"] = exit_code;
        write_json(path("manifest.json"), m);
    }

private:
    RunConfig cfg_;
    std::string command_;
    json stages_ = json::array();
    json checks_ = json::array();
    json outputs_ = json::array();
};

// --- shared setup ----------------------------------------------------------------------------------

struct Setup {
    ModelSpec model;
    WavePoint wave;
};

Setup setup(Run& run)
{
    Setup s;
    s.model = run.stage("model", [&] { return model_from_config(run.cfg()); });
    s.wave = run.stage("profile", [&] { return wave_from_config(s.model, run.cfg()); });
    emit(1, "profile", "wave ready", {{"X", s.wave.X}, {"s", s.wave.s}, {"m", s.wave.m()}});
    return s;
}

HomogenizedSystem homogenized(Run& run, const Setup& s, ManifoldJacobians* jac_out = nullptr)
{
    if (!s.wave.is_solution)
        fail(ErrorKind::NotApplicable, "the homogenized system needs a genuine wave, not a synthetic profile");
    return run.stage("homogenize", [&] {
        FindOptions fo;
        fo.m = run.cfg().m_profile;
        fo.newton_tol = run.cfg().newton_tol;
        fo.ode.rtol = run.cfg().ode_rtol;
        fo.ode.atol = run.cfg().ode_atol;
        ManifoldChart chart(s.model, s.wave, fo);
        ManifoldJacobians jac = manifold_jacobians(chart);
        if (jac_out)
            *jac_out = jac;
        return build_homogenized(jac, run.cfg().cond_max);
    });
}

VecXd config_xi(const RunConfig& cfg, int d)
{
    require(!cfg.xi.empty() && static_cast<int>(cfg.xi.size()) <= d, "evans.xi needs between 1 and d entries");
    VecXd xi = VecXd::Zero(d);
    for (size_t j = 0; j < cfg.xi.size(); ++j)
        xi(j) = cfg.xi[j];
    return xi;
}

std::vector<VecXd> zone_grid(const RunConfig& cfg, const WavePoint& w)
{
    std::vector<VecXd> grid;
    for (int i = 0; i <= cfg.xi_count; ++i) {
        VecXd xi = VecXd::Zero(w.d);
        xi(0) = (-1 + 2.0 * i / cfg.xi_count) * pi / w.X;
        grid.push_back(xi);
    }
    if (cfg.xi_count % 2)
        grid.push_back(VecXd::Zero(w.d));
    return grid;
}

MatXd gaussian_data(const TorusGrid& g, double amplitude)
{
    MatXd u(g.points(), g.n);
    const double L = g.cells * g.X;
    for (long i = 0; i < u.rows(); ++i) {
        VecXd x = g.coords(i);
        double r2 = (x(0) - L / 2) * (x(0) - L / 2);
        for (long j = 1; j < x.size(); ++j)
            r2 += (x(j) - g.Lt / 2) * (x(j) - g.Lt / 2);
        u.row(i).setConstant(amplitude * std::exp(-r2 / 2));
    }
    return u;
}

json fit_json(const PowerFit& f)
{
    return {{"exponent", f.exponent},
            {"stderr", f.stderr_},
            {"ci95", {f.exponent - 1.96 * f.stderr_, f.exponent + 1.96 * f.stderr_}},
            {"prefactor", f.prefactor},
            {"t_lo", f.t_lo},
            {"t_hi", f.t_hi},
            {"points", f.points}};
}

// --- subcommands -----------------------------------------------------------------------------------

void cmd_profile_find(Run& run)
{
    Setup s = setup(run);
    run.save_json("wave.json", to_json(s.wave));
    std::vector<std::string> head{"x"};
    for (int c = 0; c < s.wave.n; ++c)
        head.push_back("u" + std::to_string(c));
    CsvWriter csv(head);
    for (int i = 0; i < s.wave.m(); ++i) {
        std::vector<double> row{s.wave.X * i / s.wave.m()};
        for (int c = 0; c < s.wave.n; ++c)
            row.push_back(s.wave.samples(i, c));
        csv.row(row);
    }
    run.save_csv("profile.csv", csv);
}

void cmd_profile_continue(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    FindOptions fo;
    fo.m = cfg.m_profile;
    fo.newton_tol = cfg.newton_tol;
    fo.ode.rtol = cfg.ode_rtol;
    fo.ode.atol = cfg.ode_atol;
    ContinuationResult res = run.stage("continue", [&] {
        ManifoldChart chart(s.model, s.wave, fo);
        VecXd dir;
        if (cfg.direction.empty())
            dir = chart.tangent().col(0);
        else {
            require(static_cast<int>(cfg.direction.size()) == chart.param_dim(),
                    "continuation.direction needs " + std::to_string(chart.param_dim()) + " entries");
            dir = Eigen::Map<const VecXd>(cfg.direction.data(), chart.param_dim());
        }
        return continue_manifold(chart, dir, cfg.steps, cfg.ds);
    });
    std::vector<std::string> head{"arclength"};
    for (long k = 0; k < (res.params.empty() ? 0 : res.params[0].size()); ++k)
        head.push_back("y" + std::to_string(k));
    CsvWriter csv(head);
    json fam = json::array();
    for (size_t i = 0; i < res.family.size(); ++i) {
        std::vector<double> row{res.arclength[i]};
        for (long k = 0; k < res.params[i].size(); ++k)
            row.push_back(res.params[i](k));
        csv.row(row);
        fam.push_back(to_json(res.family[i]));
    }
    run.save_csv("family.csv", csv);
    run.save_json("family.json", {{"reached_end", res.reached_end}, {"stop_reason", res.stop_reason}, {"waves", fam}});
}

void cmd_homogenize(Run& run)
{
    Setup s = setup(run);
    ManifoldJacobians jac;
    HomogenizedSystem hs = homogenized(run, s, &jac);
    auto dirs = sphere_grid(s.model.d, run.cfg().sphere_count);
    HyperbolicityReport hr = check_weak_hyperbolicity(hs, dirs);
    json sp = json::array();
    for (const auto& xh : dirs) {
        CharacteristicSpeeds cs = speeds(hs, xh, run.cfg().zero_speed_tol);
        sp.push_back({{"xi_hat", to_json(xh)},
                      {"speeds", to_json(cs.speeds)},
                      {"all_eigenvalues", to_json(cs.all_eigenvalues)},
                      {"zero_modes_removed", cs.zero_modes_removed}});
    }
    json jf = json::array();
    for (const auto& J : hs.J_F)
        jf.push_back(to_json(J));
    run.save_json("homogenized.json", {{"J_MN", to_json(hs.J_MN)},
                                       {"J_F", jf},
                                       {"cond", hs.cond},
                                       {"richardson_error", jac.richardson_error},
                                       {"speeds", sp},
                                       {"weakly_hyperbolic", hr.pass},
                                       {"worst_imag", hr.worst_imag},
                                       {"distinct", hr.distinct}});
    run.check("weak hyperbolicity", hr.pass);
}

void cmd_spectrum(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    auto grid = zone_grid(cfg, s.wave);
    std::vector<VecXc> ev(grid.size());
    run.stage("spectrum", [&] {
        BlochAssembler L(s.model, s.wave, cfg.m);
        for (const auto& wmsg : L.warnings())
            emit(0, "spectrum", wmsg);
        parallel_for(static_cast<int>(grid.size()),
                     [&](int i) { ev[i] = Eigen::ComplexEigenSolver<MatXc>(L(grid[i]), false).eigenvalues(); });
    });
    CsvWriter csv({"xi1", "re", "im"});
    double maxre = -INFINITY;
    for (size_t i = 0; i < grid.size(); ++i)
        for (long k = 0; k < ev[i].size(); ++k) {
            csv.row({grid[i](0), ev[i](k).real(), ev[i](k).imag()});
            maxre = std::max(maxre, ev[i](k).real());
        }
    run.save_csv("spectrum.csv", csv);
    run.save_json("spectrum.json", {{"m", cfg.m}, {"xi_count", grid.size()}, {"max_real_part", maxre}});
}

void cmd_surfaces(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    auto rays = sphere_grid(s.model.d, cfg.rays);
    DispersionSurfaces ds = run.stage("surfaces", [&] { return track_surfaces(s.model, s.wave, rays, cfg.radii, cfg.m); });
    CsvWriter csv({"ray", "branch", "radius", "re", "im"});
    json fits = json::array();
    for (size_t r = 0; r < rays.size(); ++r) {
        for (int b = 0; b < ds.critical; ++b)
            for (size_t k = 0; k < cfg.radii.size(); ++k)
                csv.row({double(r), double(b), cfg.radii[k], ds.lambda[r][k](b).real(), ds.lambda[r][k](b).imag()});
        fits.push_back({{"xi_hat", to_json(rays[r])},
                        {"a_fit", to_json(ds.a_fit[r])},
                        {"b_fit", to_json(ds.b_fit[r])},
                        {"theta_fit", to_json(ds.theta_fit[r])}});
    }
    run.save_csv("surfaces.csv", csv);
    json out = {{"critical", ds.critical}, {"m", ds.m}, {"rays", fits}};
    if (s.wave.is_solution) {
        HomogenizedSystem hs = homogenized(run, s);
        json cmp = json::array();
        for (const auto& xh : rays)
            cmp.push_back(to_json(speeds(hs, xh, cfg.zero_speed_tol).speeds));
        out["homogenized_speeds"] = cmp;
    }
    run.save_json("surfaces.json", out);
}

void cmd_stability_report(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    StabilityOptions so;
    so.m = cfg.m;
    so.d1_margin = cfg.d1_margin;
    so.cluster_tol = cfg.cluster_tol;
    auto rays = sphere_grid(s.model.d, cfg.rays);
    StabilityReport rep = run.stage("D1-D2", [&] {
        return verify_D1_D2(s.model, s.wave, zone_grid(cfg, s.wave), rays, cfg.radii, so);
    });
    json out = {{"D1_pass", rep.D1_pass},
                {"D2_pass", rep.D2_pass},
                {"margin", rep.margin},
                {"theta_fit", rep.theta_fit},
                {"worst_xi", to_json(rep.worst_xi)},
                {"worst_lambda", to_json(rep.worst_lambda)},
                {"cluster_at_zero", rep.cluster_at_zero},
                {"notes", rep.notes}};
    run.check("D1", rep.D1_pass);
    run.check("D2", rep.D2_pass);
    if (s.wave.is_solution) {
        HomogenizedSystem hs = homogenized(run, s);
        HyperbolicityReport hr = check_weak_hyperbolicity(hs, sphere_grid(s.model.d, cfg.sphere_count));
        out["low_frequency"] = {{"weakly_hyperbolic", hr.pass}, {"worst_imag", hr.worst_imag}, {"distinct", hr.distinct}};
        run.check("weak hyperbolicity", hr.pass);
    } else {
        out["low_frequency"] = {{"skipped", "synthetic profile has no homogenized system"}};
    }
    run.save_json("stability_report.json", out);
}

EvansOptions evans_options(const RunConfig& cfg)
{
    EvansOptions eo;
    eo.ode.rtol = cfg.evans_rtol;
    eo.ode.atol = cfg.evans_atol;
    eo.cond_max = cfg.cond_max;
    return eo;
}

void cmd_evans_eval(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    EvansSystem es(s.model, s.wave, evans_options(cfg));
    VecXd xi = config_xi(cfg, s.model.d);
    EvansValue v = run.stage("evans", [&] { return es.evaluate(cplx(cfg.lambda_re, cfg.lambda_im), xi); });
    run.save_json("evans_eval.json", {{"lambda", to_json(v.lambda)},
                                      {"xi", to_json(xi)},
                                      {"value", to_json(v.value)},
                                      {"log_scale", v.log_scale},
                                      {"basis_condition", v.basis_condition},
                                      {"ill_conditioned", v.ill_conditioned}});
}

void cmd_evans_wind(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    EvansSystem es(s.model, s.wave, evans_options(cfg));
    VecXd xi = config_xi(cfg, s.model.d);
    WindingResult w = run.stage("winding", [&] {
        return winding_number(es, circle_contour(cfg.contour_center, cfg.contour_radius), xi);
    });
    run.save_json("evans_wind.json", {{"xi", to_json(xi)},
                                      {"center", cfg.contour_center},
                                      {"radius", cfg.contour_radius},
                                      {"winding", w.winding},
                                      {"raw", w.raw},
                                      {"evaluations", w.evaluations},
                                      {"min_relative_modulus", w.min_relative_modulus}});
}

void cmd_evans_lowfreq(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    HomogenizedSystem hs = homogenized(run, s);
    EvansSystem es(s.model, s.wave, evans_options(cfg));
    LowFreqResult lf = run.stage("lowfreq", [&] {
        return lowfreq_factorization(es, hs, lowfreq_rays(s.model.d, cfg.lowfreq_rays, static_cast<unsigned>(cfg.seed)),
                                     cfg.lowfreq_radii);
    });
    CsvWriter csv({"ray", "radius", "D_re", "D_im", "ratio_re", "ratio_im"});
    json rays = json::array();
    for (size_t r = 0; r < lf.rays.size(); ++r) {
        const auto& ray = lf.rays[r];
        for (size_t k = 0; k < ray.D.size(); ++k)
            csv.row({double(r), lf.radii[k], ray.D[k].real(), ray.D[k].imag(), ray.ratio[k].real(), ray.ratio[k].imag()});
        rays.push_back({{"xi_hat", to_json(ray.xi_hat)},
                        {"lambda_hat", to_json(ray.lambda_hat)},
                        {"order", ray.order},
                        {"gamma0", to_json(ray.gamma0)},
                        {"excluded", ray.excluded}});
    }
    run.save_csv("lowfreq.csv", csv);
    run.save_json("lowfreq.json", {{"vanishing_order", lf.vanishing_order},
                                   {"expected_order", s.model.n + 1},
                                   {"gamma0", to_json(lf.gamma0)},
                                   {"gamma0_spread", lf.gamma0_spread},
                                   {"rays_used", lf.rays_used},
                                   {"rays", rays},
                                   {"notes", lf.notes}});
}

void cmd_evolve(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    require(s.model.d == 1, "evolve runs the d = 1 perturbation equation");
    TorusGrid g = TorusGrid::make(s.wave, cfg.cells, cfg.cell_m);
    NonlinearOptions opt;
    for (int k = 0; k < cfg.outputs; ++k)
        opt.t_out.push_back(cfg.outputs > 1 ? cfg.t_end * k / (cfg.outputs - 1) : cfg.t_end);
    opt.rtol = cfg.nonlinear_rtol;
    opt.smallness = cfg.smallness;
    opt.eps = cfg.eps;
    opt.keep_snapshots = cfg.snapshots;
    Trajectory tr = run.stage("evolve", [&] { return nonlinear_evolve(s.model, s.wave, g, gaussian_data(g, cfg.amplitude), opt); });
    CsvWriter csv({"t", "l2", "h1", "eta"});
    for (size_t i = 0; i < tr.t.size(); ++i)
        csv.row({tr.t[i], tr.l2[i], tr.h1[i], tr.eta[i]});
    run.save_csv("evolve.csv", csv);
    if (cfg.snapshots) {
        fs::create_directories(run.path("snapshots"));
        for (size_t i = 0; i < tr.snapshots.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshots/v_%04zu.bin", i);
            write_snapshot(run.path(name), g, tr.t[i], tr.snapshots[i]);
            run.output(name);
        }
    }
    const EnergyFit& e = tr.energy;
    run.save_json("energy.json", {{"C", e.C},
                                  {"theta1", e.theta1},
                                  {"theta2", e.theta2},
                                  {"inequality_holds", e.pass},
                                  {"aborted", tr.aborted},
                                  {"steps", tr.steps},
                                  {"rejected", tr.rejected},
                                  {"note", tr.note}});
    run.check("energy inequality", e.pass && !tr.aborted);
}

void cmd_decay(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    std::vector<double> t = time_grid(cfg);
    DecayOptions opt;
    opt.split = parse_split(cfg.split);
    opt.t_fit_min = cfg.t_fit_min;
    opt.wrap_tol = cfg.wrap_tol;
    opt.eps = cfg.eps;
    DecayMeasurement dm = run.stage("decay", [&] {
        if (s.model.d == 1) {
            TorusGrid g = TorusGrid::make(s.wave, cfg.cells, cfg.cell_m);
            return measure_decay(s.model, s.wave, g, gaussian_data(g, 1.0), t, opt);
        }
        SeparableBaseline sb(s.model, s.wave);
        TorusGrid ax = TorusGrid::make(sb.axial_wave(), cfg.cells, cfg.cell_m);
        WavePoint cst = WavePoint::constant(sb.transverse_model(1), VecXd::Zero(s.model.n), 1.0, 8);
        TorusGrid ln = TorusGrid::make(cst, cfg.cells, 8);
        std::vector<MatXd> G(s.model.d - 1, gaussian_data(ln, 1.0));
        return sb.decay(ax, gaussian_data(ax, 1.0), ln, G, t, opt);
    });
    std::vector<std::string> head{"t"};
    for (double p : dm.p_list)
        head.push_back(std::isinf(p) ? "norm_inf" : "norm_" + fmt17(p));
    CsvWriter csv(head);
    for (size_t i = 0; i < dm.t.size(); ++i) {
        std::vector<double> row{dm.t[i]};
        for (size_t k = 0; k < dm.p_list.size(); ++k)
            row.push_back(dm.norms[k][i]);
        csv.row(row);
    }
    run.save_csv("decay.csv", csv);
    json fits = json::array();
    for (size_t k = 0; k < dm.p_list.size(); ++k) {
        json f = fit_json(dm.fits[k]);
        f["p"] = std::isinf(dm.p_list[k]) ? json("inf") : json(dm.p_list[k]);
        double pp = dm.p_list[k];
        f["theory"] = -(s.model.d / 2.0) * (1 - (std::isinf(pp) ? 0.0 : 1 / pp));
        fits.push_back(f);
    }
    run.save_json("decay.json", {{"split", to_string(opt.split)},
                                 {"fits", fits},
                                 {"t_wrap", std::isfinite(dm.t_wrap) ? json(dm.t_wrap) : json(nullptr)},
                                 {"truncated", dm.truncated},
                                 {"notes", dm.notes}});
}

void cmd_asymptotics(Run& run)
{
    Setup s = setup(run);
    const RunConfig& cfg = run.cfg();
    const int d = s.model.d;
    BallQuadrature quad = ball_quadrature(d, 2 * cfg.eps);
    WaveKernelBundle bundle = run.stage("kernels", [&] {
        DispersionSurfaces surf = track_surfaces(s.model, s.wave, quad.angles, cfg.radii, s.wave.m());
        return build_wave_kernels(s.model, s.wave, surf, cfg.eps);
    });
    // Gaussian data displaced from the origin, so its first moment is nonzero
    const int m = s.wave.m(), cells = 16;
    SeparableData v0;
    v0.g.resize(cells * m, s.model.n);
    for (int i = 0; i < cells * m; ++i) {
        double x = s.wave.X * i / m - cells * s.wave.X / 2 - 2.0;
        v0.g.row(i).setConstant(cfg.amplitude * std::exp(-x * x / 2));
    }
    v0.x1_origin = -cells * s.wave.X / 2;
    for (int j = 1; j < d; ++j)
        v0.transverse_hat.push_back(gaussian_hat(1.0, j % 2 ? 1.5 : -1.0));
    std::vector<double> t = time_grid(cfg);
    ResidualCurve rc = run.stage("residual", [&] {
        return asymptotic_residual(s.model, s.wave, bundle, quad, v0, t, cfg.t_fit_min, cfg.t_max);
    });
    CsvWriter csv({"t", "absolute", "reference", "relative", "low", "g_dagger_scaled"});
    for (size_t i = 0; i < rc.t.size(); ++i)
        csv.row({rc.t[i], rc.absolute[i], rc.reference[i], rc.relative[i], rc.low[i],
                 g_dagger_norm(bundle, quad, rc.t[i]) * std::pow(1 + rc.t[i], d / 4.0)});
    run.save_csv("asymptotics.csv", csv);
    run.save_json("asymptotics.json", {{"mass", to_json(rc.W)},
                                       {"relative_defined", rc.relative_defined},
                                       {"relative_fit", fit_json(rc.relative_fit)},
                                       {"absolute_fit", fit_json(rc.absolute_fit)},
                                       {"low_fit", fit_json(rc.low_fit)},
                                       {"biorthogonality_error", bundle.biorthogonality_error()},
                                       {"notes", rc.notes}});
}

void cmd_verify_all(Run& run)
{
    auto report = [&](const CriterionResult& r) {
        emit(0, "verify", summary_line(r), {{"id", r.id}, {"pass", r.pass}});
        run.check(std::to_string(r.id) + " " + r.name, r.pass);
    };
    std::vector<CriterionResult> res = run.stage("verify", [&] {
        return run.cfg().suite == "acceptance" ? run_acceptance({}, {}, report) : run_baseline(run.cfg(), report);
    });
    json rows = json::array();
    int passed = 0;
    for (const auto& r : res) {
        rows.push_back(to_json(r));
        passed += r.pass;
    }
    run.save_json("verify.json", {{"suite", run.cfg().suite},
                                  {"model", run.cfg().suite == "baseline" ? json(run.cfg().model) : json(nullptr)},
                                  {"passed", passed},
                                  {"total", res.size()},
                                  {"criteria", rows}});
    for (const auto& r : res)
        std::cout << summary_line(r) << "\n";
}

void print_error(const std::string& kind, const std::string& message, const std::string& key)
{
    json j;
    j["error"] = kind;
    j["message"] = message;
    j["key"] = key.empty() ? json(nullptr) : json(key);
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral and linear stability lab for periodic traveling waves of viscous conservation laws"};
    app.set_version_flag("--version", PTW_VERSION);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 0;
    int verbose_flags = 0;
    app.add_option("--config", config_path, "TOML configuration file")->envname("PTW_CONFIG");
    app.add_option("--threads", threads, "worker threads for frequency sweeps (0: all cores)")
        ->envname("PTW_THREADS")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_dir, "output directory (overrides the config)")->envname("PTW_OUT");
    app.add_flag("-v", verbose_flags, "more log output on stderr (-v, -vv)");

    std::function<void(Run&)> action;
    std::string command;
    auto sub = [&](CLI::App* parent, const std::string& name, const std::string& help, std::function<void(Run&)> f,
                   const std::string& full) {
        CLI::App* c = parent->add_subcommand(name, help);
        c->callback([&, f, full] {
            action = f;
            command = full;
        });
        return c;
    };

    CLI::App* profile = app.add_subcommand("profile", "periodic profiles");
    profile->require_subcommand(1);
    sub(profile, "find", "find a periodic profile", cmd_profile_find, "profile find");
    sub(profile, "continue", "continue a family of profiles", cmd_profile_continue, "profile continue");
    sub(&app, "homogenize", "linearized averaged system and characteristic speeds", cmd_homogenize, "homogenize");
    sub(&app, "spectrum", "dense Bloch spectrum over the Brillouin zone", cmd_spectrum, "spectrum");
    sub(&app, "surfaces", "critical dispersion surfaces near the origin", cmd_surfaces, "surfaces");
    sub(&app, "stability-report", "D1/D2 and weak hyperbolicity checks", cmd_stability_report, "stability-report");
    CLI::App* evans = app.add_subcommand("evans", "Evans function");
    evans->require_subcommand(1);
    sub(evans, "eval", "evaluate D(lambda, xi)", cmd_evans_eval, "evans eval");
    sub(evans, "wind", "winding number on a circle", cmd_evans_wind, "evans wind");
    sub(evans, "lowfreq", "low-frequency factorization", cmd_evans_lowfreq, "evans lowfreq");
    sub(&app, "evolve", "nonlinear perturbation evolution (d = 1)", cmd_evolve, "evolve");
    sub(&app, "decay", "linear decay rates", cmd_decay, "decay");
    sub(&app, "asymptotics", "convection-diffusion asymptotics", cmd_asymptotics, "asymptotics");
    sub(&app, "verify-all", "run the acceptance or baseline suite", cmd_verify_all, "verify-all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what(), "");
        return 2;
    }

    verbosity = verbose_flags;
    if (const char* v = std::getenv("PTW_VERBOSITY"); v && verbose_flags == 0)
        verbosity = std::atoi(v);
    set_thread_count(threads);

    RunConfig cfg;
    try {
        if (!config_path.empty())
            cfg = load_config(config_path);
        if (!out_dir.empty())
            cfg.out = out_dir;
    } catch (const Error& e) {
        print_error("config", e.what(), config_error_key(e.what()));
        return 2;
    }

    std::optional<Run> run;
    try {
        run.emplace(cfg, command);
        action(*run);
        int code = run->all_pass() ? 0 : 1;
        run->finish(code);
        return code;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) {
            print_error("config", e.what(), config_error_key(e.what()));
            return 2;
        }
        print_error(to_string(e.kind()), e.what(), "");
        if (run)
            run->finish(1);
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what(), "");
        return 1;
    }
}
