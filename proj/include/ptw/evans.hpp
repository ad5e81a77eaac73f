#pragma once

#include "ptw/fourier.hpp"
#include "ptw/homogenized.hpp"
#include "ptw/ode.hpp"
#include "ptw/profile.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ptw {

struct EvansOptions {
    OdeOptions ode{1e-12, 1e-14};
    double cond_max = 1e10;
};

// D = value * exp(log_scale); the split keeps large |lambda| representable.
struct EvansValue {
    cplx lambda;
    VecXd xi;
    cplx value;
    double log_scale = 0;
    double basis_condition = 1;
    bool ill_conditioned = false;

    cplx full() const { return value * std::exp(log_scale); }
};

// Evans function of the Bloch problem along x1 for a fixed wave.
// First-order variables (w, z) with z = B^{11} w' - A^1 w + i sum_{k>1} B^{1k} xi_k w.
class EvansSystem {
public:
    EvansSystem(const ModelSpec& model, const WavePoint& wave, const EvansOptions& opt = {});

    // 2n x 2n coefficient matrix of (w, z)' at x
    MatXc matrix(double x, cplx lambda, const VecXd& xi) const;

    // Monodromy in (w, z) variables from the identity frame, with growth shift c:
    // returns Y(X) where Phi(X) = exp(c X) Y(X).
    MatXc monodromy(cplx lambda, const VecXd& xi, double shift = 0) const;

    EvansValue evaluate(cplx lambda, const VecXd& xi) const;

    // Frames (w, w') at the requested points, identity at x1 = 0.
    std::vector<MatXc> eigen_basis(cplx lambda, const VecXd& xi, const std::vector<double>& xs) const;

    int n() const { return n_; }
    int d() const { return d_; }
    double X() const { return X_; }
    const EvansOptions& options() const { return opt_; }

private:
    ModelSpec model_;
    int n_, d_;
    double X_;
    double s_ = 0;
    TrigInterpolant interp_;
    EvansOptions opt_;
};

struct WindingOptions {
    int initial_points = 32;
    int max_points = 8192;
    double max_step_arg = pi / 4;
    double zero_tol = 1e-10; // min |D| relative to max |D| on the contour
};

struct WindingResult {
    int winding = 0;
    double raw = 0; // total argument change / 2 pi
    int evaluations = 0;
    double min_relative_modulus = 0;
};

// Counts zeros of D(., xi) inside the closed contour s -> contour(s), s in [0, 1], positively oriented.
WindingResult winding_number(const EvansSystem& ev, const std::function<cplx(double)>& contour, const VecXd& xi,
                             const WindingOptions& opt = {});

std::function<cplx(double)> circle_contour(cplx center, double radius);

struct LowFreqRay {
    VecXd xi_hat;
    cplx lambda_hat;
    std::vector<cplx> D;      // per radius
    std::vector<cplx> ratio;  // D / Delta per radius
    double order = 0;         // slope of log |D| against log r
    cplx gamma0;              // limit of the ratio as r -> 0
    bool excluded = false;
};

struct LowFreqResult {
    std::vector<double> radii;
    std::vector<LowFreqRay> rays;
    double vanishing_order = 0; // mean over used rays
    cplx gamma0;                // mean over used rays
    double gamma0_spread = 0;   // max pairwise |G_i - G_j| / |mean|
    int rays_used = 0;
    std::vector<std::string> notes;
};

// Deterministic rays (xi_hat, lambda_hat) on the unit sphere of R^d x C.
std::vector<std::pair<VecXd, cplx>> lowfreq_rays(int d, int count, unsigned seed = 7);

LowFreqResult lowfreq_factorization(const EvansSystem& ev, const HomogenizedSystem& hs,
                                    const std::vector<std::pair<VecXd, cplx>>& rays, const std::vector<double>& radii);

} // namespace ptw
