#include "ptw/fourier.hpp"
#include "ptw/errors.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>

namespace ptw {

VecXc fft(const VecXc& x)
{
    Eigen::FFT<double> f;
    VecXc out;
    f.fwd(out, x);
    return out;
}

VecXc ifft(const VecXc& x)
{
    Eigen::FFT<double> f;
    VecXc out;
    f.inv(out, x);
    return out;
}

bool is_power_of_two(long m) { return m > 0 && (m & (m - 1)) == 0; }

MatXd spectral_diff_matrix(int m, double L)
{
    require(m >= 2 && m % 2 == 0, "spectral differentiation needs an even number of points");
    MatXd D = MatXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            int k = i - j;
            if (k == 0)
                continue;
            double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            D(i, j) = (pi / L) * sgn / std::tan(pi * k / m);
        }
    return D;
}

MatXd spectral_derivative(const MatXd& samples, double L, int order)
{
    const long m = samples.rows();
    require(m % 2 == 0, "spectral derivative needs an even number of points");
    Eigen::FFT<double> f;
    MatXd out(m, samples.cols());
    VecXc in(m), hat, back;
    for (long c = 0; c < samples.cols(); ++c) {
        in = samples.col(c).cast<cplx>();
        f.fwd(hat, in);
        for (long k = 0; k < m; ++k) {
            long kk = k <= m / 2 ? k : k - m;
            if (k == m / 2 && order % 2 == 1)
                kk = 0;
            hat(k) *= std::pow(I * (2 * pi * kk / L), order);
        }
        f.inv(back, hat);
        out.col(c) = back.real();
    }
    return out;
}

MatXd resample(const MatXd& samples, int m_new)
{
    const long m = samples.rows();
    if (m == m_new)
        return samples;
    Eigen::FFT<double> f;
    MatXd out(m_new, samples.cols());
    VecXc in(m), hat, hat2 = VecXc::Zero(m_new), back;
    long kmax = std::min<long>(m, m_new) / 2;
    for (long c = 0; c < samples.cols(); ++c) {
        in = samples.col(c).cast<cplx>();
        f.fwd(hat, in);
        hat2.setZero();
        for (long k = 0; k < kmax; ++k) {
            hat2(k) = hat(k);
            if (k > 0)
                hat2(m_new - k) = hat(m - k);
        }
        // Nyquist of the coarser grid, split symmetrically
        if (m < m_new) {
            hat2(kmax) = 0.5 * hat(kmax);
            hat2(m_new - kmax) = 0.5 * hat(kmax);
        } else {
            hat2(kmax) = hat(kmax) + hat(m - kmax);
        }
        hat2 *= double(m_new) / double(m);
        f.inv(back, hat2);
        out.col(c) = back.real();
    }
    return out;
}

double high_mode_fraction(const MatXd& samples)
{
    const long m = samples.rows();
    Eigen::FFT<double> f;
    VecXc in(m), hat;
    double worst = 0;
    for (long c = 0; c < samples.cols(); ++c) {
        in = samples.col(c).cast<cplx>();
        f.fwd(hat, in);
        hat(0) = 0;
        double tot = hat.squaredNorm();
        if (tot == 0)
            continue;
        double hi = 0;
        for (long k = 0; k < m; ++k) {
            long kk = k <= m / 2 ? k : m - k;
            if (kk > m / 4)
                hi += std::norm(hat(k));
        }
        worst = std::max(worst, hi / tot);
    }
    return worst;
}

TrigInterpolant::TrigInterpolant(const MatXd& samples, double L, double tol) : L_(L)
{
    const long m = samples.rows();
    const long n = samples.cols();
    require(m >= 2 && m % 2 == 0, "trigonometric interpolation needs an even number of samples");
    Eigen::FFT<double> f;
    MatXc hat(m, n);
    VecXc in(m), out;
    for (long c = 0; c < n; ++c) {
        in = samples.col(c).cast<cplx>();
        f.fwd(out, in);
        hat.col(c) = out / double(m);
    }
    mean_ = hat.row(0).real().transpose();
    double scale = hat.cwiseAbs().maxCoeff();
    long K = m / 2 - 1;
    while (K > 0 && hat.row(K).cwiseAbs().maxCoeff() <= tol * scale)
        --K;
    K_ = static_cast<int>(K);
    coef_ = hat.block(1, 0, K, n);
    // Nyquist mode: fold in as a cosine when it is not negligible
    if (hat.row(m / 2).cwiseAbs().maxCoeff() > tol * scale) {
        K_ = static_cast<int>(m / 2);
        coef_ = hat.block(1, 0, m / 2, n);
        coef_.row(m / 2 - 1) = 0.5 * hat.row(m / 2);
    }
}

void TrigInterpolant::eval(double x, VecXd& u, VecXd& du) const
{
    const long n = mean_.size();
    u = mean_;
    du = VecXd::Zero(n);
    double w = 2 * pi / L_;
    cplx e1 = std::polar(1.0, w * x), ek = 1.0;
    for (int k = 1; k <= K_; ++k) {
        ek *= e1;
        for (long c = 0; c < n; ++c) {
            cplx t = coef_(k - 1, c) * ek;
            u(c) += 2 * t.real();
            du(c) += -2 * w * k * t.imag();
        }
    }
}

VecXd TrigInterpolant::value(double x) const
{
    VecXd u, du;
    eval(x, u, du);
    return u;
}

VecXd TrigInterpolant::derivative(double x) const
{
    VecXd u, du;
    eval(x, u, du);
    return du;
}

} // namespace ptw
