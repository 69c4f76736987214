#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "arzctl/errors.hpp"
#include "arzctl/numerics.hpp"

namespace arzctl {

/// Rolling record of the spatially distributed input over the last delay
/// window. Holds the commands issued at t - D + dt, ..., t - dt plus a
/// prehistory for times before the simulation start, and serves the delayed
/// transport state: the value at clock s in [0, D] is the command issued at
/// time t + s - D (the prehistory below t = 0), interpolated linearly in both
/// space and time.
class ControlHistory {
public:
    ControlHistory(std::size_t nx, double dx, double dt, double delay)
        : nx_(nx), dx_(dx), dt_(dt), delay_(delay) {
        if (nx < 2 || dx <= 0.0 || dt <= 0.0 || delay < 0.0)
            throw validation_error("history: bad grid or step");
        const double ratio = delay / dt;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * (1.0 + ratio))
            throw validation_error("history: dt must divide the delay");
        m_ = static_cast<std::size_t>(rounded);
        prehistory_.assign(m_, std::vector<double>(nx_, 0.0));
    }

    std::size_t slices() const { return m_; }
    double delay() const { return delay_; }
    double dt() const { return dt_; }
    std::size_t steps_taken() const { return n_; }

    /// Input profile that was in flight before the start, at clock xi in
    /// [0, D): slice j holds the value for xi = j * dt. Defaults to zero.
    void set_prehistory(std::vector<std::vector<double>> theta0) {
        if (theta0.size() != m_)
            throw validation_error("history: prehistory needs one slice per delay step");
        for (const auto& sl : theta0)
            if (sl.size() != nx_)
                throw validation_error("history: prehistory slice has wrong width");
        prehistory_ = std::move(theta0);
    }

    /// Record the command issued at the current time and advance the clock.
    void push(std::vector<double> u) {
        if (u.size() != nx_)
            throw validation_error("history: slice has wrong width");
        stored_.push_back(std::move(u));
        if (stored_.size() > m_ + 1) stored_.pop_front();
        ++n_;
    }

    /// Transport state at position x and clock s, taking `candidate` as the
    /// not-yet-pushed command of the current step (needed at s = D).
    double sample(double x, double s, std::span<const double> candidate) const {
        if (s < -1e-12 || s > delay_ + 1e-9)
            throw validation_error("history: clock outside [0, D]");
        if (m_ == 0) return sample_linear(candidate, dx_, x);
        const double f = static_cast<double>(n_) - static_cast<double>(m_) +
                         std::clamp(s, 0.0, delay_) / dt_;
        const double fl = std::floor(f);
        const double w = f - fl;
        const long q0 = static_cast<long>(fl);
        const double a = at_index(q0, x, candidate);
        if (w < 1e-12) return a;
        const double b = at_index(q0 + 1, x, candidate);
        return (1.0 - w) * a + w * b;
    }

    /// Value delivered at position x right now (clock 0, no candidate needed).
    double applied(double x) const {
        static const std::vector<double> none;
        return sample(x, 0.0, none);
    }

private:
    // command issued at time index q (time q * dt); q < 0 reads prehistory
    double at_index(long q, double x, std::span<const double> candidate) const {
        if (q < 0) {
            const long g = q + static_cast<long>(m_);
            if (g < 0)
                throw validation_error("history: clock before the recorded window");
            return sample_linear(prehistory_[static_cast<std::size_t>(g)], dx_, x);
        }
        const long n = static_cast<long>(n_);
        if (q == n) {
            if (candidate.empty())
                throw validation_error("history: current command not yet recorded");
            return sample_linear(candidate, dx_, x);
        }
        const long back = n - q; // 1 = most recent stored slice
        const long avail = static_cast<long>(stored_.size());
        if (back < 1 || back > avail)
            throw validation_error("history: slice outside the retained window");
        return sample_linear(stored_[static_cast<std::size_t>(avail - back)], dx_, x);
    }

    std::size_t nx_;
    double dx_;
    double dt_;
    double delay_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::deque<std::vector<double>> stored_;
    std::vector<std::vector<double>> prehistory_;
};

} // namespace arzctl
