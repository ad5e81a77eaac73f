#include "ptw/acceptance.hpp"
#include "ptw/semigroup.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace ptw;

TEST_CASE("zero perturbation stays zero")
{
    ModelSpec m = synthetic_stable_model(1);
    WavePoint w = synthetic_stable_wave(m);
    TorusGrid g = TorusGrid::make(w, 8, w.m());
    NonlinearOptions opt;
    opt.t_out = {0, 1, 2};
    Trajectory tr = nonlinear_evolve(m, w, g, MatXd::Zero(g.points(), 1), opt);
    for (double v : tr.l2)
        CHECK(v == 0);
    CHECK(tr.energy.pass);
}

TEST_CASE("small data follows the linear semigroup")
{
    ModelSpec m = synthetic_stable_model(1);
    WavePoint w = synthetic_stable_wave(m);
    TorusGrid g = TorusGrid::make(w, 16, w.m());
    MatXd v0(g.points(), 1);
    for (long i = 0; i < v0.rows(); ++i) {
        double x = g.coords(i)(0) - 8;
        v0(i, 0) = 1e-5 * std::exp(-x * x);
    }
    NonlinearOptions opt;
    opt.t_out = {0, 1, 3};
    opt.keep_snapshots = true;
    Trajectory tr = nonlinear_evolve(m, w, g, v0, opt);
    LinearSemigroup S(m, w, g, opt.eps);
    for (size_t i = 0; i < tr.t.size(); ++i) {
        MatXd lin = S.evolve(v0.cast<cplx>(), tr.t[i]).real();
        CHECK(l2_norm(g, (tr.snapshots[i] - lin).cast<cplx>()) < 1e-3 * l2_norm(g, v0.cast<cplx>()));
    }
    // the nonlinear flux is conservative too
    CHECK(std::abs(tr.snapshots.back().sum() - v0.sum()) < 1e-10 * v0.cwiseAbs().sum());
}

TEST_CASE("energy fit on an exactly decaying series")
{
    std::vector<double> t, h1, l2;
    for (int k = 0; k <= 20; ++k) {
        t.push_back(0.5 * k);
        h1.push_back(std::exp(-0.5 * t.back()));
        l2.push_back(0.5 * h1.back());
    }
    EnergyFit e = fit_energy(t, h1, l2);
    CHECK(e.pass);
    CHECK(e.C <= 1.0 + 1e-12);
    CHECK(e.theta1 >= 1.0 - 1e-12); // ||v||^2 decays at rate 1
}

TEST_CASE("snapshot files round trip")
{
    ModelSpec m = heat(2, 1.0);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 1.0, 4);
    TorusGrid g = TorusGrid::make(w, 4, 4, 4, 3.0);
    MatXd u = MatXd::Random(g.points(), 1);
    auto path = (std::filesystem::temp_directory_path() / "ptw_snapshot_test.bin").string();
    write_snapshot(path, g, 2.5, u);
    TorusGrid g2;
    double t = 0;
    MatXd v = read_snapshot(path, g2, t);
    std::remove(path.c_str());
    CHECK(t == 2.5);
    CHECK(g2.d == 2);
    CHECK(g2.nt == 4);
    CHECK(g2.Lt == 3.0);
    CHECK(v == u);
}
