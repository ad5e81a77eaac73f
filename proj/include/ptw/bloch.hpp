#pragma once

#include "ptw/profile.hpp"
#include "ptw/types.hpp"

#include <string>
#include <vector>

namespace ptw {

// Linearized coefficients at one point of the profile:
// B[j*d+k] = B^{jk}(u),  A[j] v = Df^j(u) v - (DB^{j1}(u) v) u' - s v [j = 1],
// in the frame moving with speed s along x1.
struct PointCoefficients {
    std::vector<MatXd> B;
    std::vector<MatXd> A;
};
PointCoefficients linearized_coefficients(const ModelSpec& model, const VecXd& u, const VecXd& up, double s = 0);

// Builds L_xi for many frequencies from one set of precomputed collocation pieces.
// Unknowns are ordered component-major: index c*m + i.
class BlochAssembler {
public:
    BlochAssembler(const ModelSpec& model, const WavePoint& wave, int m);

    MatXc operator()(const VecXd& xi) const;

    int m() const { return m_; }
    int n() const { return n_; }
    int d() const { return d_; }
    double X() const { return X_; }
    double h() const { return X_ / m_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const MatXd& profile() const { return u_; }

private:
    int m_, n_, d_;
    double X_;
    MatXd u_;
    MatXc L0_, L1_;
    std::vector<MatXd> Bd_; // block-diagonal coefficient matrices, d*d
    std::vector<MatXc> T_;  // transverse first-order pieces, j = 1..d-1
    std::vector<std::string> warnings_;
};

struct BlochOperator {
    VecXd xi;
    int m = 0;
    int n = 0;
    double X = 1;
    MatXc L;
    std::vector<std::string> warnings;
};

BlochOperator assemble(const ModelSpec& model, const WavePoint& wave, const VecXd& xi, int m = 256);

// Eigenpairs sorted by decreasing real part; left vectors satisfy <l_i, r_j> = delta_ij
// in the L2(0, X) inner product sampled with weight X/m.
struct BlochSpectrum {
    VecXd xi;
    VecXc eigenvalues;
    MatXc right;
    MatXc left;
};

BlochSpectrum spectrum(const MatXc& L, double weight, bool vectors = true);
BlochSpectrum spectrum(const BlochOperator& op, bool vectors = true);

struct StabilityReport {
    bool D1_pass = false;
    bool D2_pass = false;
    double margin = 0;  // -max Re lambda over the grid, translation cluster excluded
    double theta_fit = 0;
    VecXd worst_xi;
    cplx worst_lambda;
    int cluster_at_zero = 0;
    std::vector<std::string> notes;
};

struct StabilityOptions {
    int m = 128;
    double d1_margin = 1e-8;
    double cluster_tol = 1e-4;
};

// D1 on the frequency grid (xi = 0 cluster excluded) and D2 (-Re lambda >= theta |xi|^2)
// on the critical branches along small-frequency rays.
StabilityReport verify_D1_D2(const ModelSpec& model, const WavePoint& wave, const std::vector<VecXd>& xi_grid,
                             const std::vector<VecXd>& rays, const std::vector<double>& radii,
                             const StabilityOptions& opt = {});

struct DispersionSurfaces {
    int critical = 0;
    std::vector<VecXd> rays;
    std::vector<double> radii;
    // lambda[ray][radius](branch)
    std::vector<std::vector<VecXc>> lambda;
    // fits lambda ~ -i a r + b r^2 per ray and branch
    std::vector<VecXc> a_fit;
    std::vector<VecXc> b_fit;
    std::vector<VecXd> theta_fit;
    // branch eigenvectors at the smallest radius (right and biorthogonal left), per ray
    std::vector<MatXc> right0;
    std::vector<MatXc> left0;
    int m = 0;
    double X = 1;
};

DispersionSurfaces track_surfaces(const ModelSpec& model, const WavePoint& wave, const std::vector<VecXd>& rays,
                                  const std::vector<double>& radii, int m = 128);

// Indices of the `count` eigenvalues closest to the origin, failing when they are not
// separated from the rest by at least `separation`.
std::vector<int> nearest_cluster(const VecXc& ev, int count, double separation = 4.0);

} // namespace ptw
