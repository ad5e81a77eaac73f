#include "ptw/acceptance.hpp"
#include "ptw/semigroup.hpp"

#include <doctest.h>

#include <random>

using namespace ptw;

namespace {

MatXc random_field(const TorusGrid& g, unsigned seed)
{
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    MatXc u(g.points(), g.n);
    for (long i = 0; i < u.rows(); ++i)
        for (long c = 0; c < u.cols(); ++c)
            u(i, c) = cplx(nd(gen), nd(gen));
    return u;
}

} // namespace

TEST_CASE("Bloch transform: Parseval and round trip in d = 1, 2, 3")
{
    for (int d : {1, 2, 3}) {
        ModelSpec m = heat(d, 1.0);
        WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 1.5, 8);
        TorusGrid g = TorusGrid::make(w, 6, 8, d > 1 ? 6 : 1, d > 1 ? 7.0 : 1.0);
        MatXc u = random_field(g, 10 + d);
        BlochField f = bloch_forward(g, u);
        double direct = std::sqrt(g.cell_volume() * u.squaredNorm());
        CHECK(l2_norm(g, u) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(std::abs(f.norm() - l2_norm(g, u)) < 1e-12 * l2_norm(g, u));
        CHECK((bloch_inverse(f) - u).norm() < 1e-12 * u.norm());
    }
}

TEST_CASE("heat semigroup damps a Fourier mode at rate kappa k^2")
{
    const double kappa = 0.8;
    ModelSpec m = heat(1, kappa);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 1.0, 8);
    TorusGrid g = TorusGrid::make(w, 16, 8);
    const double L = g.cells * g.X, k = 2 * pi * 3 / L;
    MatXc u0(g.points(), 1);
    for (long i = 0; i < u0.rows(); ++i)
        u0(i, 0) = std::cos(k * g.coords(i)(0));
    for (double t : {0.5, 2.0}) {
        MatXc u = LinearSemigroup(m, w, g).evolve(u0, t);
        CHECK((u - std::exp(-kappa * k * k * t) * u0).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("split identity and conservation on the synthetic wave")
{
    ModelSpec m = synthetic_stable_model(1);
    WavePoint w = synthetic_stable_wave(m);
    TorusGrid g = TorusGrid::make(w, 16, w.m());
    LinearSemigroup S(m, w, g, 0.3);
    MatXc u0 = random_field(g, 5);
    u0 = u0.real().cast<cplx>();
    BlochField f = bloch_forward(g, u0);
    MatXc full = S.apply(f, 1.5, Split::Full).coeff;
    MatXc parts = S.apply(f, 1.5, Split::Low).coeff + S.apply(f, 1.5, Split::High).coeff;
    CHECK((full - parts).norm() < 1e-12 * full.norm());
    MatXc u = S.evolve(u0, 3.0);
    CHECK(std::abs(u.sum() - u0.sum()) < 1e-10 * u0.cwiseAbs().sum());
    CHECK(S.max_real_part() < 1e-10);
}

TEST_CASE("cutoff plateaus, midpoint and monotonicity")
{
    const double eps = 0.3;
    CHECK(cutoff(0.0, eps) == 1.0);
    CHECK(cutoff(eps, eps) == 1.0);
    CHECK(cutoff(2 * eps, eps) == 0.0);
    CHECK(cutoff(1.0, eps) == 0.0);
    CHECK(cutoff(1.5 * eps, eps) == doctest::Approx(0.5));
    double prev = 1;
    for (int i = 1; i < 50; ++i) {
        double v = cutoff(eps * (1 + i / 50.0), eps);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("derivative and norms on the torus")
{
    ModelSpec m = heat(2, 1.0);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 1.0, 8);
    TorusGrid g = TorusGrid::make(w, 4, 8, 8, 4.0);
    MatXc u(g.points(), 1), du(g.points(), 1);
    const double k = 2 * pi / g.Lt;
    for (long i = 0; i < u.rows(); ++i) {
        VecXd x = g.coords(i);
        u(i, 0) = std::sin(k * x(1)) * std::cos(2 * pi * x(0) / 4.0);
        du(i, 0) = k * std::cos(k * x(1)) * std::cos(2 * pi * x(0) / 4.0);
    }
    CHECK((torus_derivative(g, u, 1) - du).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(lp_norm(g, u, std::numeric_limits<double>::infinity()) == doctest::Approx(u.cwiseAbs().maxCoeff()));
    CHECK(lp_norm(g, u, 2) == doctest::Approx(l2_norm(g, u)));
}

TEST_CASE("power fit recovers an exact law")
{
    std::vector<double> t, y;
    for (int k = 0; k < 20; ++k) {
        t.push_back(std::pow(10.0, 3.0 * k / 19));
        y.push_back(3.0 * std::pow(1 + t.back(), -0.7));
    }
    PowerFit f = fit_power(t, y, 1, 1000);
    CHECK(f.exponent == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.stderr_ < 1e-10);
}

TEST_CASE("split names")
{
    CHECK(parse_split("S_I") == Split::Low);
    CHECK(parse_split("S_II") == Split::High);
    CHECK(parse_split("full") == Split::Full);
    CHECK_THROWS(parse_split("other"));
}

TEST_CASE("separable baseline rejects non-separable models")
{
    ModelSpec v = vdw_cubic(2);
    WavePoint w = WavePoint::constant(v, VecXd::Zero(2), 1.0, 8);
    MatXd JF(2, 2);
    std::vector<MatXd> A{MatXd::Identity(2, 2), MatXd::Identity(2, 2)};
    std::vector<MatXd> B(4, MatXd::Identity(2, 2));
    B[1](0, 1) = 0.3; // cross viscosity
    ModelSpec cc = constant_coefficient(A, B);
    CHECK_THROWS_AS(SeparableBaseline(cc, WavePoint::constant(cc, VecXd::Zero(2), 1.0, 8)), Error);
}
