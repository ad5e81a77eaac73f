#include "ptw/fourier.hpp"

#include <doctest.h>

#include <random>

using namespace ptw;

TEST_CASE("fft matches the direct sum")
{
    const int m = 12;
    std::mt19937 gen(3);
    std::normal_distribution<double> nd;
    VecXc x(m);
    for (int i = 0; i < m; ++i)
        x(i) = cplx(nd(gen), nd(gen));
    VecXc X = fft(x);
    for (int k = 0; k < m; ++k) {
        cplx s = 0;
        for (int j = 0; j < m; ++j)
            s += x(j) * std::exp(-2.0 * pi * I * double(j * k) / double(m));
        CHECK(std::abs(X(k) - s) < 1e-12);
    }
    CHECK((ifft(X) - x).norm() < 1e-13);
}

TEST_CASE("spectral derivative of a trigonometric polynomial is exact")
{
    const int m = 32;
    const double L = 3.0;
    MatXd s(m, 1), ds(m, 1);
    for (int i = 0; i < m; ++i) {
        double x = L * i / m, k = 2 * pi / L;
        s(i, 0) = std::sin(3 * k * x) + 0.5 * std::cos(k * x);
        ds(i, 0) = 3 * k * std::cos(3 * k * x) - 0.5 * k * std::sin(k * x);
    }
    CHECK((spectral_derivative(s, L) - ds).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((spectral_diff_matrix(m, L) * s - ds).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("resampling and interpolation reproduce band-limited data")
{
    const int m = 16;
    MatXd s(m, 1);
    auto f = [](double x) { return 1 + std::cos(2 * pi * x) - 0.25 * std::sin(4 * pi * x); };
    for (int i = 0; i < m; ++i)
        s(i, 0) = f(double(i) / m);
    MatXd r = resample(s, 40);
    for (int i = 0; i < 40; ++i)
        CHECK(r(i, 0) == doctest::Approx(f(i / 40.0)).epsilon(1e-12));
    TrigInterpolant ti(s, 1.0);
    CHECK(ti.value(0.3137)(0) == doctest::Approx(f(0.3137)).epsilon(1e-12));
    double h = 1e-6;
    CHECK(ti.derivative(0.2)(0) == doctest::Approx((f(0.2 + h) - f(0.2 - h)) / (2 * h)).epsilon(1e-7));
    CHECK(high_mode_fraction(s) < 1e-20);
}
