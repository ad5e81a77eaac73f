#pragma once

#include "ptw/types.hpp"

namespace ptw {

// Unnormalized forward DFT and its inverse (inverse scales by 1/m).
VecXc fft(const VecXc& x);
VecXc ifft(const VecXc& x);

bool is_power_of_two(long m);

// Fourier collocation first-derivative matrix on m uniform points of [0, L), m even.
MatXd spectral_diff_matrix(int m, double L);

// Column-wise spectral derivative of periodic samples on [0, L).
MatXd spectral_derivative(const MatXd& samples, double L, int order = 1);

// Fourier resampling of periodic samples (rows = points) to m_new points.
MatXd resample(const MatXd& samples, int m_new);

// Fraction of spectral energy carried by modes with |k| > m/4, per worst column.
double high_mode_fraction(const MatXd& samples);

// Band-limited interpolant of periodic samples, truncated where modes drop below tol.
class TrigInterpolant {
public:
    TrigInterpolant() = default;
    TrigInterpolant(const MatXd& samples, double L, double tol = 1e-15);

    VecXd value(double x) const;
    VecXd derivative(double x) const;
    // value and derivative in one pass
    void eval(double x, VecXd& u, VecXd& du) const;

    int modes() const { return K_; }
    double period() const { return L_; }

private:
    double L_ = 1;
    int K_ = 0;
    VecXd mean_;
    MatXc coef_; // (K x n), coefficient of exp(2 pi i k x / L) for k = 1..K; negative k by conjugation
};

} // namespace ptw
