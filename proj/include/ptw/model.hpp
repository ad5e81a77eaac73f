#pragma once

#include "ptw/types.hpp"

#include <functional>
#include <map>
#include <string>

namespace ptw {

// u_t + sum_j f^j(u)_{x_j} = sum_{j,k} (B^{jk}(u) u_{x_k})_{x_j},  u in R^n, x in R^d.
// Direction indices are 0-based; index 0 is the wave direction x1.
struct ModelSpec {
    std::string id;
    int n = 0;
    int d = 1;
    std::map<std::string, double> params;

    std::function<VecXd(int j, const VecXd& u)> flux;
    std::function<MatXd(int j, int k, const VecXd& u)> viscosity;

    // Optional analytic derivatives; finite differences are used when empty.
    std::function<MatXd(int j, const VecXd& u)> flux_jacobian;
    // (DB^{jk}(u) v)
    std::function<MatXd(int j, int k, const VecXd& u, const VecXd& v)> viscosity_derivative;
    // Optional state domain; flux evaluations outside it raise a domain error.
    std::function<bool(const VecXd& u)> in_domain;

    VecXd f(int j, const VecXd& u) const;
    MatXd B(int j, int k, const VecXd& u) const;
    MatXd Df(int j, const VecXd& u) const;
    MatXd DB(int j, int k, const VecXd& u, const VecXd& v) const;

    // sum_{j,k} nu_j nu_k B^{jk}(u)
    MatXd B_nu(const VecXd& nu, const VecXd& u) const;
    // sum_j nu_j f^j(u)
    VecXd f_nu(const VecXd& nu, const VecXd& u) const;

    // true when B^{jk} does not depend on u (lets callers skip DB terms)
    bool constant_viscosity = false;
};

struct H1Report {
    bool pass = false;
    double theta = 0.0; // min over samples of min Re sigma(B^nu)
    VecXd worst_state;
    VecXd worst_nu;
};

// Checks Re sigma(sum B^{jk} nu_j nu_k) >= theta > 0 on sampled states and unit directions.
H1Report check_h1(const ModelSpec& model, const std::vector<VecXd>& states, int directions_per_dim = 16);

// f^j(u) = A[j] u, B^{jk} = Bm[j*d + k] constant.
ModelSpec constant_coefficient(const std::vector<MatXd>& A, const std::vector<MatXd>& Bm);

// Scalar heat equation in d dimensions with diffusivity kappa.
ModelSpec heat(int d = 1, double kappa = 1.0);

// u = (tau, v): tau_t - v_x = tau_xx, v_t + p(tau)_x = v_xx with p(tau) = c3 tau^3 - c1 tau.
// For d > 1 the transverse fluxes vanish and B^{jk} = delta_{jk} I.
ModelSpec vdw_cubic(int d = 1, double c3 = 1.0, double c1 = 1.0);

// Scalar law f^1(u) = c u + beta u^2 / 2, B^{11}(u) = b0 + b1 u; transverse directions j > 0
// carry linear flux a_j u and constant diffusion kappa_j.
struct ScalarViscousParams {
    double c = 0.0;
    double beta = 1.0;
    double b0 = 1.0;
    double b1 = 0.0;
    std::vector<double> transverse_speed;     // size d-1
    std::vector<double> transverse_diffusion; // size d-1
};
ModelSpec scalar_viscous(int d, const ScalarViscousParams& p);

// Builds a built-in model from its id and a flat parameter map.
ModelSpec make_model(const std::string& id, int d, const std::map<std::string, double>& params);

} // namespace ptw
