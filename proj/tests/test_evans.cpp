#include "ptw/bloch.hpp"
#include "ptw/evans.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace ptw;

TEST_CASE("heat: Evans function equals (e^{mu X} - g)(e^{-mu X} - g), mu = sqrt(lambda / kappa)")
{
    const double kappa = 1.3, X = 1.5;
    ModelSpec m = heat(1, kappa);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), X, 8);
    EvansSystem es(m, w);
    for (cplx l : {cplx(0.5, 0.2), cplx(-2.0, 1.0), cplx(0.1, -3.0)})
        for (double xi : {0.0, 0.7, -1.9}) {
            cplx mu = std::sqrt(l / kappa), g = std::exp(I * xi * X);
            cplx exact = (std::exp(mu * X) - g) * (std::exp(-mu * X) - g);
            cplx D = es.evaluate(l, VecXd::Constant(1, xi)).full();
            CHECK(std::abs(D - exact) < 1e-9 * std::abs(exact));
        }
}

TEST_CASE("heat: winding number counts the Bloch eigenvalues inside the circle")
{
    const double kappa = 0.5;
    ModelSpec m = heat(1, kappa);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 1.0, 8);
    EvansSystem es(m, w);
    for (double xi : {0.3, 2.0}) {
        int count = 0;
        for (int k = -5; k <= 5; ++k) {
            double lam = -kappa * std::pow(xi + 2 * pi * k, 2);
            count += std::abs(lam + 4.0) < 5.0;
        }
        WindingResult r = winding_number(es, circle_contour(-4.0, 5.0), VecXd::Constant(1, xi));
        CHECK(r.winding == count);
    }
}

TEST_CASE("large lambda: accurate up to moderate growth, flagged beyond")
{
    ModelSpec m = heat(1, 1.0);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 2.0, 8);
    EvansSystem es(m, w);
    // |D| ~ e^{sqrt(lambda) X} for real lambda and xi = 0
    EvansValue v = es.evaluate(cplx(100, 0), VecXd::Constant(1, 0.0));
    CHECK(std::log(std::abs(v.value)) + v.log_scale == doctest::Approx(20.0).epsilon(1e-6));
    // past e^{sqrt(lambda) X} ~ 1/eps the determinant cancels; the value stays finite and is flagged
    EvansValue far = es.evaluate(cplx(4000, 0), VecXd::Constant(1, 0.0));
    CHECK(far.log_scale > 0);
    CHECK(std::isfinite(std::abs(far.value)));
    CHECK(far.ill_conditioned);
}

TEST_CASE("low-frequency rays are unit vectors in R^d x C")
{
    for (const auto& [x, l] : lowfreq_rays(3, 5))
        CHECK(std::sqrt(x.squaredNorm() + std::norm(l)) == doctest::Approx(1.0));
}

TEST_CASE("circle contour orientation")
{
    auto c = circle_contour(cplx(1, 0), 2.0);
    CHECK(std::abs(c(0.25) - cplx(1, 2)) < 1e-14);
}
