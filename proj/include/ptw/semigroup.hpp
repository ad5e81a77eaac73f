#pragma once

#include "ptw/bloch.hpp"
#include "ptw/profile.hpp"
#include "ptw/types.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace ptw {

// Periodic computational box: `cells` copies of the period cell [0, X) along x1 with m points
// each, and for d > 1 a torus of side Lt with nt points in every transverse direction.
// Point index p = i1 + M1 * (i2 + nt * i3 ...), M1 = cells * m.
struct TorusGrid {
    int d = 1;
    int n = 1;
    int m = 32;
    int cells = 64;
    int nt = 1;
    double Lt = 1;
    double X = 1;

    long line() const { return static_cast<long>(cells) * m; }
    long transverse_points() const;
    long points() const { return line() * transverse_points(); }
    int nodes() const { return static_cast<int>(cells * transverse_points()); }
    double h() const { return X / m; }
    double ht() const { return d > 1 ? Lt / nt : 1.0; }
    double cell_volume() const;
    // quadrature weight of one frequency node, (2 pi / (cells X)) (2 pi / Lt)^(d-1)
    double xi_weight() const;
    VecXd xi(int node) const;
    VecXd coords(long p) const;

    static TorusGrid make(const WavePoint& wave, int cells, int m, int nt = 1, double Lt = 1);
    void validate() const;
};

// u(x) -> u^(xi, x1) at the grid's frequency nodes; coeff has one column per node,
// component-major (c*m + i), matching the layout of L_xi.
struct BlochField {
    TorusGrid grid;
    MatXc coeff;
    // (2 pi)^-d sum_nodes w (1/X) h |u^|^2, equal to the squared L2 norm in x
    double norm() const;
};

BlochField bloch_forward(const TorusGrid& grid, const MatXc& u);
MatXc bloch_inverse(const BlochField& field);

double l2_norm(const TorusGrid& grid, const MatXc& u);
double lp_norm(const TorusGrid& grid, const MatXc& u, double p);
// spectral derivative along axis (0 = x1) on the torus
MatXc torus_derivative(const TorusGrid& grid, const MatXc& u, int axis = 0);
// embeds data in a grid with more cells (and, for d > 1, a proportionally larger torus),
// keeping the original box at the origin
MatXc pad_grid(const TorusGrid& from, const TorusGrid& to, const MatXc& u);

// Smooth cutoff, identically one for r <= eps and zero for r >= 2 eps.
double cutoff(double r, double eps);

enum class Split { Full, Low, High };
Split parse_split(const std::string& s);
std::string to_string(Split s);

// Spectral data of L_xi at one frequency node.
struct NodeSpectrum {
    VecXd xi;
    double phi = 0;
    VecXc lambda;
    MatXc V, Vinv;
    std::vector<int> critical;
    bool defective = false;
    MatXc L; // kept only for defective nodes
    MatXc P; // contour projector onto the critical cluster, defective nodes only
};

NodeSpectrum node_spectrum(const MatXc& L, const VecXd& xi, int ncrit, double eps, double cond_max = 1e10);
// critical-cluster projector by trapezoidal resolvent quadrature on a circle about the origin
MatXc contour_projector(const MatXc& L, double radius, int points = 64);

class LinearSemigroup {
public:
    LinearSemigroup(const ModelSpec& model, const WavePoint& wave, const TorusGrid& grid, double eps = 0.3);

    // modal coordinates V^-1 u^ per node
    MatXc modal(const BlochField& f) const;
    BlochField synthesize(const MatXc& modal, double t, Split split) const;
    BlochField apply(const BlochField& f, double t, Split split) const;
    MatXc evolve(const MatXc& u0, double t, Split split = Split::Full) const;

    // slowest decay rate among modes that S^II carries with weight above `weight_floor`
    // relative to the data
    double high_gap(const BlochField& data, double weight_floor = 1e-6) const;
    double max_real_part() const;

    const TorusGrid& grid() const { return grid_; }
    const NodeSpectrum& node(int k) const { return nodes_[k]; }
    int critical() const { return ncrit_; }
    double eps() const { return eps_; }
    int defective_nodes() const;
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    TorusGrid grid_;
    int ncrit_;
    double eps_;
    std::vector<NodeSpectrum> nodes_;
    std::vector<std::string> warnings_;
};

struct PowerFit {
    double exponent = 0;
    double stderr_ = 0;
    double prefactor = 0;
    double t_lo = 0, t_hi = 0;
    int points = 0;
};
// least squares fit of log y against log(1 + t) on [t_lo, t_hi]
PowerFit fit_power(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi);

struct DecayOptions {
    std::vector<double> p_list{2.0, std::numeric_limits<double>::infinity()};
    Split split = Split::Full;
    // x1 derivatives applied to the data: norms of S(t) d^k u0
    int derivative = 0;
    double t_fit_min = 10;
    double wrap_tol = 1e-3;
    double eps = 0.3;
};

struct DecayMeasurement {
    std::vector<double> t;
    std::vector<double> p_list;
    std::vector<std::vector<double>> norms; // [p][t]
    std::vector<PowerFit> fits;
    double t_wrap = 0; // first time the doubled-torus run disagrees
    bool truncated = false;
    std::vector<std::string> notes;
};

// Norms of S(t) u0 (or S(t) du0/dx1) with wrap-around detected against a run on a
// torus twice as long.
DecayMeasurement measure_decay(const ModelSpec& model, const WavePoint& wave, const TorusGrid& grid,
                               const MatXd& u0, const std::vector<double>& t, const DecayOptions& opt = {});

struct HighFreqDecay {
    std::vector<double> t;
    std::vector<double> norms;
    double initial = 0;
    double theta = 0;    // fitted exponential rate
    double gap = 0;      // slowest S^II mode present in the data
    double max_ratio = 0; // sup_t ||S^II(t) u0|| / ||u0||
    double rel_diff() const { return std::abs(theta - gap) / gap; }
};

HighFreqDecay high_freq_decay(const LinearSemigroup& S, const MatXd& u0, const std::vector<double>& t,
                              double fit_from = 0.5, double weight_floor = 1e-6);

// Separable baselines: periodic structure in x1 and constant scalar-multiple coefficients
// in the transverse directions.
class SeparableBaseline {
public:
    SeparableBaseline(const ModelSpec& model, const WavePoint& wave);

    // model and wave restricted to the x1 axis
    const ModelSpec& axial_model() const { return axial_; }
    const WavePoint& axial_wave() const { return axial_wave_; }
    // constant-coefficient d = 1 model for transverse axis j (1..d-1)
    const ModelSpec& transverse_model(int j) const { return transverse_[j - 1]; }
    int d() const { return d_; }

    // L2 or sup norm of S(t) applied to g(x1) prod_j G_j(x_j), each factor evolved on its own torus
    DecayMeasurement decay(const TorusGrid& axial, const MatXd& g, const TorusGrid& line,
                           const std::vector<MatXd>& G, const std::vector<double>& t, const DecayOptions& opt) const;

private:
    int d_;
    ModelSpec axial_;
    WavePoint axial_wave_;
    std::vector<ModelSpec> transverse_;
};

ModelSpec restrict_to_axis(const ModelSpec& model);

// Quadrature on the ball |xi| < rmax in polar form: angles x graded Gauss-Legendre radial panels.
struct BallQuadrature {
    int d = 1;
    double rmax = 0;
    std::vector<VecXd> angles;
    std::vector<double> angle_weights;
    std::vector<double> radii;
    std::vector<double> radial_weights; // includes r^(d-1)
};

BallQuadrature ball_quadrature(int d, double rmax, int n_theta = 8, int n_phi = 12, int gl = 8, double r_first = 0.005);
void gauss_legendre(int k, VecXd& nodes, VecXd& weights);

struct WaveKernelBundle {
    int critical = 0;
    int n = 0, d = 1, m = 0;
    double X = 1;
    double eps = 0.3;
    MatXc Pi, Pi_tilde; // (n m) x critical, h Pi_tilde^* Pi = I
    std::vector<VecXd> angles;
    std::vector<MatXc> alpha, alpha_tilde;
    std::vector<VecXc> c1, c2; // lambda_dagger = c1 r + c2 r^2 per angle
    // angular models used away from the sampled angles when critical == 1:
    // c1(xh) = xh . v, c2(xh) = xh^T Q xh (complex forms fitted over the sampled angles)
    VecXc c1_form;
    MatXc c2_form;
    bool has_forms = false;

    double biorthogonality_error() const;
    double alpha_error() const;
    // index of the sampled angle matching xh, or -1
    int angle_index(const VecXd& xh, double tol = 1e-12) const;
    VecXc lambda_dagger(const VecXd& xi) const;
    // [g_xi(t)], and the separate hyperbolic/diffusive multipliers (phi in W only)
    MatXc g_hat(const VecXd& xi, double t) const;
    MatXc w_hat(const VecXd& xi, double t) const;
    MatXc k_hat(const VecXd& xi, double t) const;
};

WaveKernelBundle build_wave_kernels(const ModelSpec& model, const WavePoint& wave, const DispersionSurfaces& surfaces,
                                    double eps = 0.3);

// Kernels sampled on a periodic box of side `length` with `points` per direction (d <= 3).
struct ConvectionDiffusionWave {
    double t = 0;
    int points = 0;
    double length = 0;
    int d = 1, critical = 1;
    // one column per kernel entry (row-major in the critical x critical matrix), box points as rows
    MatXc g, W, K;
    double convolution_error = 0;   // max |W*K - g| / max |g|
    double commutation_error = 0;   // max |W*K - K*W| / max |g|
};

ConvectionDiffusionWave convection_diffusion_wave(const WaveKernelBundle& bundle, double t, int points, double length);

// ||g(., t)||_L2 by ball quadrature at the bundle's angles
double g_dagger_norm(const WaveKernelBundle& bundle, const BallQuadrature& quad, double t);

// Localized initial data g(x1) prod_j G_j(x_j): g sampled on whole cells starting at x1 = x1_origin,
// transverse factors given by their Fourier transforms.
struct SeparableData {
    MatXd g; // (cells m) x n
    double x1_origin = 0;
    std::vector<std::function<cplx(double)>> transverse_hat;
    // Bloch coefficients v^(xi, .) in component-major layout
    VecXc bloch(const VecXd& xi, int m, double X) const;
};

std::function<cplx(double)> gaussian_hat(double sigma, double center = 0);
std::function<cplx(double)> odd_gaussian_hat(double sigma);

struct ResidualCurve {
    std::vector<double> t;
    std::vector<double> absolute, reference, relative, low;
    VecXc W; // h Pi_tilde^* v^(0), equal to X times the mass of w0
    bool relative_defined = true;
    PowerFit relative_fit, absolute_fit, low_fit;
    std::vector<std::string> notes;
};

ResidualCurve asymptotic_residual(const ModelSpec& model, const WavePoint& wave, const WaveKernelBundle& bundle,
                                  const BallQuadrature& quad, const SeparableData& v0, const std::vector<double>& t,
                                  double t_fit_lo, double t_fit_hi);

struct NonlinearOptions {
    std::vector<double> t_out;
    // local error of the nonlinear increment relative to ||v||
    double rtol = 1e-6;
    double atol = 1e-300;
    double h0 = 1e-2;
    double hmax = 0.25;
    double smallness = 0.5; // abort threshold on the H1 norm
    double eps = 0.3;
    bool keep_snapshots = false;
};

struct EnergyFit {
    double C = 0, theta1 = 0, theta2 = 0;
    bool pass = false;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> l2, h1, eta;
    std::vector<MatXd> snapshots;
    EnergyFit energy;
    bool aborted = false;
    int steps = 0, rejected = 0;
    std::string note;
};

// Perturbation equation about the wave on a d = 1 torus: exponential integrator, linear part
// exact per frequency node, nonlinearity explicit (second-order Runge-Kutta with embedded error).
Trajectory nonlinear_evolve(const ModelSpec& model, const WavePoint& wave, const TorusGrid& grid, const MatXd& v0,
                            const NonlinearOptions& opt);

// The H^1 inequality ||v||^2 <= C e^{-th1 t}||v0||^2 + C int e^{-th2 (t-s)}||v||_L2^2 fitted on a grid
EnergyFit fit_energy(const std::vector<double>& t, const std::vector<double>& h1, const std::vector<double>& l2);

// Flat binary snapshot: int32 d, n, m, cells, nt; float64 X, Lt, t; then points x n reals, row-major.
void write_snapshot(const std::string& path, const TorusGrid& grid, double t, const MatXd& u);
MatXd read_snapshot(const std::string& path, TorusGrid& grid, double& t);

} // namespace ptw
