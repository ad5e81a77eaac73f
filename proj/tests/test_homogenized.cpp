#include "ptw/homogenized.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

using namespace ptw;

namespace {

HomogenizedSystem random_system(int n, int d, unsigned seed)
{
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    const int N = n + d;
    MatXd JMN = MatXd::Identity(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            JMN(i, j) += 0.3 * nd(gen);
    std::vector<MatXd> JF(d, MatXd::Zero(N, N));
    VecXd g(N);
    for (int i = 0; i < N; ++i)
        g(i) = nd(gen);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < N; ++c)
                JF[j](i, c) = nd(gen);
        // rows of Omega N carry the gradient of S Omega in direction j only
        JF[j].row(n + j) = g.transpose();
    }
    return build_homogenized(JMN, JF);
}

} // namespace

TEST_CASE("hat_delta is the determinant of lambda J_MN + i xi.J_F")
{
    HomogenizedSystem hs = random_system(2, 2, 1);
    VecXd xi(2);
    xi << 0.3, -0.7;
    cplx l(0.4, 1.1);
    MatXc M = l * hs.J_MN.cast<cplx>() + I * (xi(0) * hs.J_F[0] + xi(1) * hs.J_F[1]).cast<cplx>();
    CHECK(std::abs(hat_delta(hs, xi, l) - M.determinant()) < 1e-10 * std::abs(M.determinant()));
    // delta removes the lambda^{d-1} factor
    CHECK(std::abs(delta(hs, xi, l) * l - hat_delta(hs, xi, l)) < 1e-9 * std::abs(hat_delta(hs, xi, l)));
}

TEST_CASE("d = 1: speeds are the eigenvalues of J_MN^{-1} J_F")
{
    HomogenizedSystem hs = random_system(2, 1, 4);
    MatXd A = hs.J_MN.inverse() * hs.J_F[0];
    VecXc ev = Eigen::EigenSolver<MatXd>(A).eigenvalues();
    CharacteristicSpeeds cs = speeds(hs, VecXd::Ones(1));
    CHECK(cs.speeds.size() == 3);
    CHECK(cs.zero_modes_removed == 0);
    for (long i = 0; i < ev.size(); ++i) {
        double best = INFINITY;
        for (long j = 0; j < cs.speeds.size(); ++j)
            best = std::min(best, std::abs(ev(i) - cs.speeds(j)));
        CHECK(best < 1e-10);
    }
}

TEST_CASE("roots of delta are -i times the retained speeds")
{
    HomogenizedSystem hs = random_system(2, 3, 9);
    VecXd xh(3);
    xh << 0.48, 0.6, 0.64;
    CharacteristicSpeeds cs = speeds(hs, xh);
    CHECK(cs.zero_modes_removed == 2);
    VecXc roots = delta_roots(hs, xh);
    CHECK(roots.size() == 3);
    for (long i = 0; i < roots.size(); ++i) {
        double best = INFINITY;
        for (long j = 0; j < cs.speeds.size(); ++j)
            best = std::min(best, std::abs(roots(i) + I * cs.speeds(j)));
        CHECK(best < 1e-8);
    }
}

TEST_CASE("weak hyperbolicity of a symmetric system")
{
    MatXd JF(2, 2);
    JF << 0, 1, 1, 0;
    HomogenizedSystem hs = build_homogenized(MatXd::Identity(2, 2), {JF});
    HyperbolicityReport r = check_weak_hyperbolicity(hs, sphere_grid(1, 2));
    CHECK(r.pass);
    CHECK(r.distinct);
    MatXd JR(2, 2);
    JR << 0, 1, -1, 0; // speeds +-i
    CHECK_FALSE(check_weak_hyperbolicity(build_homogenized(MatXd::Identity(2, 2), {JR}), sphere_grid(1, 2)).pass);
}

TEST_CASE("sphere grids are unit vectors")
{
    for (int d : {1, 2, 3}) {
        auto g = sphere_grid(d, 20);
        CHECK(!g.empty());
        for (const auto& v : g)
            CHECK(v.norm() == doctest::Approx(1.0));
    }
}
