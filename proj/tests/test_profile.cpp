#include "ptw/fourier.hpp"
#include "ptw/profile.hpp"

#include <doctest.h>

using namespace ptw;

namespace {

WavePoint vdw_wave(const ModelSpec& m)
{
    PeriodicGuess g;
    g.a = VecXd(2);
    g.a << 1.332139883511645, 0.0;
    g.q = VecXd::Zero(2);
    return find_periodic(m, g);
}

} // namespace

TEST_CASE("vdw_cubic periodic orbit closes and satisfies the profile equation")
{
    ModelSpec m = vdw_cubic(1);
    WavePoint w = vdw_wave(m);
    CHECK(w.is_solution);
    CHECK(w.X > 0);
    // integrate once more from the anchor: the orbit returns to it
    ProfileSamples ps = integrate_profile(m, w.anchor, w.X, w.s, w.nu, w.q, 64);
    CHECK((ps.end - w.anchor).norm() < 1e-8);
    // u' = B^{-1}(f(u) - s u - q) sampled against the spectral derivative of the profile
    MatXd du = spectral_derivative(w.samples, w.X);
    double worst = 0;
    for (int i = 0; i < w.m(); ++i)
        worst = std::max(worst, (du.row(i).transpose() - profile_rhs(m, w.samples.row(i).transpose(), w.s, w.nu, w.q)).norm());
    CHECK(worst < 1e-7);
}

TEST_CASE("class functions satisfy sum_j nu_j F^j = s M + q")
{
    ModelSpec m = vdw_cubic(2);
    PeriodicGuess g;
    g.a = VecXd(2);
    g.a << 1.332139883511645, 0.0;
    g.q = VecXd::Zero(2);
    WavePoint w = find_periodic(m, g);
    ClassFunctions cf = class_functions(m, w);
    CHECK((cf.F * w.nu - (w.s * cf.M + w.q)).norm() < 1e-8);
    CHECK(cf.X == doctest::Approx(w.X));
    CHECK(cf.Omega == doctest::Approx(1 / w.X));
}

TEST_CASE("constant states")
{
    ModelSpec m = heat(1, 1.0);
    WavePoint w = WavePoint::constant(m, VecXd::Constant(1, 2.0), 3.0, 8);
    CHECK_FALSE(w.is_solution);
    CHECK(w.critical_count() == 1);
    CHECK(w.M(0) == doctest::Approx(2.0));
}

TEST_CASE("manifold chart has dimension n + d and its base point is a fixed point")
{
    ModelSpec m = vdw_cubic(1);
    WavePoint w = vdw_wave(m);
    ManifoldChart ch(m, w);
    CHECK(ch.dim() == 3);
    CHECK(ch.tangent().cols() == 3);
    CHECK(ch.residual(ch.base_params()).norm() < 1e-8);
    VecXd c = VecXd::Zero(3);
    c(0) = 1e-3;
    VecXd y = ch.project(c);
    CHECK(ch.residual(y).norm() < 1e-8);
}
