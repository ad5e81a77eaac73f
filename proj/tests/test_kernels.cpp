#include "ptw/acceptance.hpp"
#include "ptw/bloch.hpp"
#include "ptw/semigroup.hpp"

#include <doctest.h>

using namespace ptw;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2k-1 exactly")
{
    VecXd x, w;
    gauss_legendre(6, x, w);
    CHECK(w.sum() == doctest::Approx(2.0));
    for (int p = 0; p <= 11; ++p) {
        double q = (w.array() * x.array().pow(p)).sum();
        double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
        CHECK(q == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("ball quadrature reproduces volumes and moments")
{
    const double R = 0.6;
    const double vol[] = {2 * R, pi * R * R, 4.0 / 3 * pi * R * R * R};
    for (int d : {1, 2, 3}) {
        BallQuadrature q = ball_quadrature(d, R);
        double aw = 0, rw = 0, r2 = 0;
        for (double a : q.angle_weights)
            aw += a;
        for (size_t k = 0; k < q.radii.size(); ++k) {
            rw += q.radial_weights[k];
            r2 += q.radial_weights[k] * q.radii[k] * q.radii[k];
        }
        CHECK(aw * rw == doctest::Approx(vol[d - 1]).epsilon(1e-12));
        // int |xi|^2 over the ball = |S^{d-1}| R^{d+2} / (d+2)
        CHECK(aw * r2 == doctest::Approx(vol[d - 1] * d * R * R / (d + 2)).epsilon(1e-12));
    }
}

TEST_CASE("Gaussian transforms match direct quadrature")
{
    const double sigma = 0.8, c = 1.3, z = 0.9;
    cplx direct = 0, odd = 0;
    const double h = 0.01;
    for (int i = -2000; i <= 2000; ++i) {
        double x = i * h;
        direct += h * std::exp(-(x - c) * (x - c) / (2 * sigma * sigma)) * std::exp(-I * z * x);
        odd += h * x * std::exp(-x * x / (2 * sigma * sigma)) * std::exp(-I * z * x);
    }
    CHECK(std::abs(gaussian_hat(sigma, c)(z) - direct) < 1e-10);
    CHECK(std::abs(odd_gaussian_hat(sigma)(z) - odd) < 1e-10);
}

TEST_CASE("wave kernels on the d = 1 synthetic wave")
{
    ModelSpec m = synthetic_stable_model(1);
    WavePoint w = synthetic_stable_wave(m);
    BallQuadrature q = ball_quadrature(1, 0.6);
    DispersionSurfaces s = track_surfaces(m, w, q.angles, {1e-3, 2e-3, 4e-3, 6e-3, 8e-3}, w.m());
    WaveKernelBundle b = build_wave_kernels(m, w, s, 0.3);
    CHECK(b.critical == 1);
    CHECK(b.biorthogonality_error() < 1e-10);
    CHECK(b.alpha_error() < 1e-10);
    // lambda_dagger reproduces the tracked branch at small radius
    VecXd xi = VecXd::Constant(1, 2e-3);
    cplx tracked = s.lambda[b.angle_index(VecXd::Ones(1))][1](0);
    CHECK(std::abs(b.lambda_dagger(xi)(0) - tracked) < 1e-8);
    // g = W * K, and the two factors commute
    ConvectionDiffusionWave cdw = convection_diffusion_wave(b, 5.0, 64, 80.0);
    CHECK(cdw.convolution_error < 1e-12);
    CHECK(cdw.commutation_error < 1e-12);
    // heat-like decay of the kernel: ||g(t)|| (1+t)^{1/4} bounded above and below
    double a = g_dagger_norm(b, q, 10) * std::pow(11, 0.25), c = g_dagger_norm(b, q, 100) * std::pow(101, 0.25);
    CHECK(a / c < 2);
    CHECK(c / a < 2);
}
