#include "ptw/errors.hpp"
#include "ptw/model.hpp"

#include <doctest.h>

using namespace ptw;

TEST_CASE("vdw_cubic flux and analytic Jacobian")
{
    ModelSpec m = vdw_cubic(1, 2.0, 0.5);
    VecXd u(2);
    u << 0.7, -0.3;
    // f = (-v, p(tau)), p = c3 tau^3 - c1 tau
    VecXd f = m.f(0, u);
    CHECK(f(0) == doctest::Approx(0.3));
    CHECK(f(1) == doctest::Approx(2.0 * 0.343 - 0.5 * 0.7));
    MatXd J = m.Df(0, u);
    CHECK(J(0, 0) == doctest::Approx(0));
    CHECK(J(0, 1) == doctest::Approx(-1));
    CHECK(J(1, 0) == doctest::Approx(3 * 2.0 * 0.49 - 0.5));
    CHECK(J(1, 1) == doctest::Approx(0));
    CHECK((m.B(0, 0, u) - MatXd::Identity(2, 2)).norm() == doctest::Approx(0));
}

TEST_CASE("finite-difference Jacobian of a model without analytic derivative")
{
    ScalarViscousParams p;
    p.c = 0.4;
    p.beta = 1.5;
    p.b0 = 1;
    p.b1 = 0.3;
    ModelSpec m = scalar_viscous(1, p);
    VecXd u = VecXd::Constant(1, 0.8);
    CHECK(m.Df(0, u)(0, 0) == doctest::Approx(0.4 + 1.5 * 0.8).epsilon(1e-7));
    VecXd v = VecXd::Constant(1, 2.0);
    CHECK(m.DB(0, 0, u, v)(0, 0) == doctest::Approx(0.3 * 2.0).epsilon(1e-7));
}

TEST_CASE("directional combinations")
{
    ModelSpec h = heat(3, 2.0);
    VecXd nu(3);
    nu << 0.6, 0.8, 0;
    VecXd u = VecXd::Constant(1, 1.0);
    CHECK(h.B_nu(nu, u)(0, 0) == doctest::Approx(2.0));
    CHECK(h.f_nu(nu, u)(0) == doctest::Approx(0));
}

TEST_CASE("H1 check")
{
    std::vector<VecXd> states{VecXd::Constant(1, 0.0), VecXd::Constant(1, 1.0)};
    H1Report r = check_h1(heat(2, 0.5), states);
    CHECK(r.pass);
    CHECK(r.theta == doctest::Approx(0.5));
    MatXd B(2, 2);
    B << 1, 3, 0, -0.5;
    ModelSpec anti = constant_coefficient({MatXd::Identity(2, 2)}, {B});
    H1Report bad = check_h1(anti, {VecXd::Zero(2)});
    CHECK_FALSE(bad.pass);
    CHECK(bad.theta == doctest::Approx(-0.5));
    // scalar viscosity 1 - 2u leaves the domain before it loses parabolicity
    ScalarViscousParams p;
    p.b1 = -2;
    CHECK_THROWS_AS(check_h1(scalar_viscous(1, p), states), Error);
}

TEST_CASE("make_model")
{
    ModelSpec m = make_model("const_coeff", 1, {{"n", 2}, {"a0_01", 3.0}, {"b00_11", 2.0}});
    CHECK(m.n == 2);
    VecXd u = VecXd::Zero(2);
    CHECK(m.Df(0, u)(0, 1) == doctest::Approx(3.0));
    CHECK(m.B(0, 0, u)(1, 1) == doctest::Approx(2.0));
    CHECK(m.B(0, 0, u)(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_model("nope", 1, {}), Error);
}
