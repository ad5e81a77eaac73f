#pragma once

#include "ptw/errors.hpp"
#include "ptw/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace ptw {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h0 = 0.0; // 0: pick from the interval length
    double hmax = std::numeric_limits<double>::infinity();
    long max_steps = 2000000;
};

struct OdeStats {
    long steps = 0;
    long rejected = 0;
    long evals = 0;
};

// Dormand-Prince 5(4) with FSAL and standard step-size control.
// State is any Eigen dense type (real or complex, vector or matrix).
template <typename State>
class Dopri5 {
public:
    using Rhs = std::function<State(double, const State&)>;

    Dopri5(Rhs f, double x0, State y0, OdeOptions opt = {})
        : f_(std::move(f)), x_(x0), y_(std::move(y0)), opt_(opt)
    {
        k1_ = eval(x_, y_);
        h_ = opt_.h0;
    }

    double x() const { return x_; }
    const State& state() const { return y_; }
    const OdeStats& stats() const { return stats_; }

    // Takes one accepted step, never passing `target`. Returns the step actually taken.
    double step(double target)
    {
        double span = target - x_;
        if (span == 0)
            return 0;
        double dir = span > 0 ? 1.0 : -1.0;
        if (h_ == 0)
            h_ = std::min(std::abs(span) / 16, opt_.hmax);
        for (;;) {
            if (++stats_.steps > opt_.max_steps)
                fail(ErrorKind::Convergence, "ODE integrator exceeded the step budget");
            double h = std::min({std::abs(h_), opt_.hmax, std::abs(span)});
            bool last = h >= std::abs(span) * (1 - 1e-14);
            if (last)
                h = std::abs(span);
            double hs = dir * h;

            State k2 = eval(x_ + c2 * hs, y_ + hs * (a21 * k1_));
            State k3 = eval(x_ + c3 * hs, y_ + hs * (a31 * k1_ + a32 * k2));
            State k4 = eval(x_ + c4 * hs, y_ + hs * (a41 * k1_ + a42 * k2 + a43 * k3));
            State k5 = eval(x_ + c5 * hs, y_ + hs * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4));
            State k6 = eval(x_ + hs, y_ + hs * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            State ynew = y_ + hs * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            State k7 = eval(x_ + hs, ynew);
            State err = hs * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            auto sc = (opt_.atol + opt_.rtol * y_.cwiseAbs().cwiseMax(ynew.cwiseAbs()).array()).eval();
            double en = std::sqrt((err.cwiseAbs().array() / sc).square().mean());
            if (!std::isfinite(en))
                en = 1e10;

            if (en <= 1.0) {
                double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                x_ = last ? target : x_ + hs;
                y_ = std::move(ynew);
                k1_ = std::move(k7);
                h_ = h * fac;
                if (!y_.allFinite())
                    fail(ErrorKind::Numerical, "ODE solution became non-finite");
                return hs;
            }
            ++stats_.rejected;
            h_ = h * std::max(0.2, 0.9 * std::pow(en, -0.2));
            if (h_ < 1e-14 * std::max(1.0, std::abs(x_)))
                fail(ErrorKind::Convergence, "ODE step size underflow");
        }
    }

    void advance_to(double target)
    {
        while (x_ != target)
            step(target);
    }

    // Restarts from a new point (keeps the current step-size guess).
    void reset(double x0, State y0)
    {
        x_ = x0;
        y_ = std::move(y0);
        k1_ = eval(x_, y_);
    }

private:
    State eval(double x, const State& y)
    {
        ++stats_.evals;
        return f_(x, y);
    }

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    Rhs f_;
    double x_;
    State y_;
    State k1_;
    OdeOptions opt_;
    OdeStats stats_;
    double h_ = 0;
};

template <typename State, typename F>
State integrate(F&& f, double x0, double x1, const State& y0, const OdeOptions& opt = {}, OdeStats* stats = nullptr)
{
    Dopri5<State> ode(std::forward<F>(f), x0, y0, opt);
    ode.advance_to(x1);
    if (stats)
        *stats = ode.stats();
    return ode.state();
}

} // namespace ptw
