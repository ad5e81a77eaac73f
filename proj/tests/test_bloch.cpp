#include "ptw/bloch.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>

using namespace ptw;

namespace {

std::vector<cplx> sorted_by_real(const VecXc& v)
{
    std::vector<cplx> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
    return s;
}

} // namespace

TEST_CASE("heat equation: Bloch eigenvalues are -kappa (xi + 2 pi k / X)^2")
{
    const double kappa = 0.7, X = 2.0, xi = 0.4;
    ModelSpec m = heat(1, kappa);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), X, 16);
    BlochOperator op = assemble(m, w, VecXd::Constant(1, xi), 16);
    auto ev = sorted_by_real(Eigen::ComplexEigenSolver<MatXc>(op.L, false).eigenvalues());
    std::vector<double> exact;
    for (int k = -7; k <= 8; ++k)
        exact.push_back(-kappa * std::pow(xi + 2 * pi * k / X, 2));
    std::sort(exact.rbegin(), exact.rend());
    for (size_t i = 0; i < exact.size(); ++i)
        CHECK(std::abs(ev[i] - exact[i]) < 1e-9 * (1 + std::abs(exact[i])));
}

TEST_CASE("d = 2 heat with transverse frequency")
{
    ModelSpec m = heat(2, 1.0);
    WavePoint w = WavePoint::constant(m, VecXd::Zero(1), 1.0, 8);
    VecXd xi(2);
    xi << 0.2, 0.9;
    BlochOperator op = assemble(m, w, xi, 8);
    auto ev = sorted_by_real(Eigen::ComplexEigenSolver<MatXc>(op.L, false).eigenvalues());
    CHECK(std::abs(ev[0] - cplx(-(0.04 + 0.81), 0)) < 1e-10);
}

TEST_CASE("constant-coefficient system: Fourier symbol eigenvalues")
{
    MatXd A(2, 2), B(2, 2);
    A << 0.3, 1.0, -0.4, 0.2;
    B << 1.0, 0.2, 0.1, 0.8;
    ModelSpec m = constant_coefficient({A}, {B});
    WavePoint w = WavePoint::constant(m, VecXd::Zero(2), 1.0, 16);
    const double xi = -0.9;
    BlochOperator op = assemble(m, w, VecXd::Constant(1, xi), 16);
    VecXc ev = Eigen::ComplexEigenSolver<MatXc>(op.L, false).eigenvalues();
    for (int k = -3; k <= 3; ++k) {
        double kk = xi + 2 * pi * k;
        MatXc sym = -I * kk * A.cast<cplx>() - kk * kk * B.cast<cplx>();
        VecXc se = Eigen::ComplexEigenSolver<MatXc>(sym, false).eigenvalues();
        for (long j = 0; j < 2; ++j) {
            double best = INFINITY;
            for (long i = 0; i < ev.size(); ++i)
                best = std::min(best, std::abs(ev(i) - se(j)));
            CHECK(best < 1e-9 * (1 + std::abs(se(j))));
        }
    }
}

TEST_CASE("left and right eigenvectors are biorthogonal")
{
    ModelSpec m = heat(1, 1.0);
    MatXd s(16, 1);
    for (int i = 0; i < 16; ++i)
        s(i, 0) = 1 + 0.2 * std::sin(2 * pi * i / 16);
    WavePoint w = WavePoint::synthetic(m, s, 1.0);
    BlochOperator op = assemble(m, w, VecXd::Constant(1, 0.3), 16);
    BlochSpectrum sp = spectrum(op);
    const double h = op.X / op.m;
    MatXc G = h * sp.left.adjoint() * sp.right;
    CHECK((G - MatXc::Identity(G.rows(), G.cols())).norm() < 1e-8);
    for (long i = 0; i + 1 < sp.eigenvalues.size(); ++i)
        CHECK(sp.eigenvalues(i).real() >= sp.eigenvalues(i + 1).real() - 1e-12);
}

TEST_CASE("nearest cluster")
{
    VecXc ev(5);
    ev << cplx(-3, 0), cplx(1e-9, 0), cplx(-1e-8, 1e-9), cplx(-5, 1), cplx(2e-9, 0);
    auto idx = nearest_cluster(ev, 3);
    std::sort(idx.begin(), idx.end());
    CHECK(idx == std::vector<int>{1, 2, 4});
}
