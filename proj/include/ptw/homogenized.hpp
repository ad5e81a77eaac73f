#pragma once

#include "ptw/profile.hpp"
#include "ptw/types.hpp"

#include <vector>

namespace ptw {

// Linearized averaged system  J_MN u_t + sum_j J_F^j u_{x_j} = 0.
struct HomogenizedSystem {
    int n = 0;
    int d = 1;
    MatXd J_MN;
    std::vector<MatXd> J_F;
    double cond = 0; // condition number of J_MN
};

HomogenizedSystem build_homogenized(const MatXd& J_MN, const std::vector<MatXd>& J_F, double cond_max = 1e12);
HomogenizedSystem build_homogenized(const ManifoldJacobians& jac, double cond_max = 1e12);

// A(xi) = J_MN^{-1} sum_j xi_j J_F^j
MatXd build_A(const HomogenizedSystem& hs, const VecXd& xi);

struct CharacteristicSpeeds {
    VecXd xi_hat;
    VecXc speeds;          // n + 1 retained eigenvalues, sorted by real part
    VecXc all_eigenvalues; // n + d eigenvalues of A(xi_hat)
    int zero_modes_removed = 0;
    int zero_cluster = 0;  // eigenvalues below zero_tol before removal
};

// Removes the d-1 zero modes whose eigenvectors violate curl(Omega N) = 0.
CharacteristicSpeeds speeds(const HomogenizedSystem& hs, const VecXd& xi_hat, double zero_tol_rel = 1e-9);

struct HyperbolicityReport {
    bool pass = false;        // all retained speeds real
    double worst_imag = 0;
    VecXd worst_direction;
    bool distinct = false;    // retained speeds pairwise distinct on the whole grid
    double min_gap = 0;
};

HyperbolicityReport check_weak_hyperbolicity(const HomogenizedSystem& hs, const std::vector<VecXd>& directions,
                                             double tol_rel = 1e-7);

// Deterministic unit directions (d = 1: +-1; d = 2: circle; d = 3: Fibonacci sphere).
std::vector<VecXd> sphere_grid(int d, int count);

// det(lambda J_MN + i sum_j xi_j J_F^j)
cplx hat_delta(const HomogenizedSystem& hs, const VecXd& xi, cplx lambda);
// lambda^{1-d} hat_delta, by exact polynomial deflation in lambda
cplx delta(const HomogenizedSystem& hs, const VecXd& xi, cplx lambda);
// coefficients of delta(xi, .) in increasing powers of lambda (degree n+1)
VecXc delta_coefficients(const HomogenizedSystem& hs, const VecXd& xi);
VecXc delta_roots(const HomogenizedSystem& hs, const VecXd& xi);

} // namespace ptw
