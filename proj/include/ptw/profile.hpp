#pragma once

#include "ptw/model.hpp"
#include "ptw/ode.hpp"
#include "ptw/types.hpp"

#include <string>
#include <vector>

namespace ptw {

// A periodic profile u(x . nu - s t) sampled on m uniform points of [0, X).
struct WavePoint {
    std::string model_id;
    int n = 0;
    int d = 1;
    double X = 1;
    double s = 0;
    VecXd nu;
    VecXd q;
    VecXd anchor;
    MatXd samples; // m x n
    // false for constant states and synthetic (non-solution) profiles used as test baselines
    bool is_solution = true;

    VecXd M;  // average of u
    MatXd F;  // n x d, average of f^j(u) - sum_k B^{jk}(u) nu_k u'

    int m() const { return static_cast<int>(samples.rows()); }
    double omega() const { return 1.0 / X; }
    // number of Bloch eigenvalues at lambda = 0 when xi = 0
    int critical_count() const { return is_solution ? n + 1 : n; }

    static WavePoint constant(const ModelSpec& model, const VecXd& state, double X, int m = 32);
    static WavePoint synthetic(const ModelSpec& model, const MatXd& samples, double X);
};

struct ClassFunctions {
    double X = 0, Omega = 0, S = 0;
    VecXd N, M, Q;
    MatXd F; // n x d
};

ClassFunctions class_functions(const ModelSpec& model, const WavePoint& w);

// u' = B_nu(u)^{-1} (f_nu(u) - s u - q)
VecXd profile_rhs(const ModelSpec& model, const VecXd& u, double s, const VecXd& nu, const VecXd& q);

// Samples of the profile started at a over [0, X) on m points, plus u(X).
struct ProfileSamples {
    MatXd samples;
    VecXd end;
};
ProfileSamples integrate_profile(const ModelSpec& model, const VecXd& a, double X, double s, const VecXd& nu,
                                 const VecXd& q, int m, const OdeOptions& opt = {});

struct PeriodicGuess {
    VecXd a;
    double X = 0; // 0: estimate from the first return to the section
    double s = 0;
    VecXd nu; // empty: e1
    VecXd q;
};

struct FindOptions {
    int m = 256;
    double newton_tol = 1e-10;
    int max_iter = 40;
    OdeOptions ode{1e-12, 1e-13};
};

WavePoint find_periodic(const ModelSpec& model, const PeriodicGuess& guess, const FindOptions& opt = {});

// First return time of the profile flow to the hyperplane through a normal to u'(a).
double first_return_time(const ModelSpec& model, const VecXd& a, double s, const VecXd& nu, const VecXd& q,
                         double x_max, const OdeOptions& opt = {});

// Local chart of the (n+d)-dimensional manifold of periodic profiles near a base wave.
// Parameter vector y = (X, a[n], s, eta[d-1], q[n]); nu(eta) = normalize(nu0 + E eta).
class ManifoldChart {
public:
    ManifoldChart(const ModelSpec& model, const WavePoint& base, const FindOptions& opt = {});

    int dim() const { return n_ + d_; }
    int param_dim() const { return 2 * n_ + d_ + 1; }
    const VecXd& base_params() const { return y0_; }
    const MatXd& tangent() const { return T_; }
    const WavePoint& base() const { return base_; }
    const ModelSpec& model() const { return model_; }
    const FindOptions& options() const { return opt_; }

    // Parameter vector on the manifold for chart coordinates c.
    VecXd project(const VecXd& c) const;
    WavePoint point(const VecXd& c) const;
    WavePoint wave_at(const VecXd& y) const;

    // residual G(y) = (u(X) - a, <psi, a - a0>) and its Jacobian
    VecXd residual(const VecXd& y) const;
    MatXd jacobian(const VecXd& y) const;
    VecXd nu_of(const VecXd& y) const;

    // newton onto G = 0 with the correction restricted to the row space at the base
    VecXd correct(const VecXd& y_pred) const;

private:
    ModelSpec model_;
    WavePoint base_;
    FindOptions opt_;
    int n_, d_;
    VecXd y0_, psi_, a0_, nu0_;
    MatXd E_;  // d x (d-1) complement of nu0
    MatXd T_;  // tangent basis
    MatXd R_;  // row space of DG at base
    MatXd DG0_;
};

struct ContinuationResult {
    std::vector<WavePoint> family;
    std::vector<VecXd> params;
    std::vector<double> arclength;
    bool reached_end = false;
    std::string stop_reason;
};

// Pseudo-arclength continuation along the curve of the chart whose coordinates
// orthogonal to `direction` (given in parameter space) stay at zero.
ContinuationResult continue_manifold(const ManifoldChart& chart, const VecXd& direction, int steps, double ds);

struct ManifoldJacobians {
    MatXd J_MN;             // d(M, Omega N) / d(chart), (n+d) x (n+d)
    std::vector<MatXd> J_F; // d(F^j, S Omega e_j) / d(chart)
    double step = 0;
    double richardson_error = 0;
};

ManifoldJacobians manifold_jacobians(const ManifoldChart& chart, double h_rel = 1e-4);

} // namespace ptw
