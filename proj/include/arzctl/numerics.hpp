#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "arzctl/errors.hpp"

namespace arzctl {

/// Uniform grid over [0, L] with M+1 nodes.
struct Grid {
    double length = 0.0;
    double dx = 0.0;
    std::size_t nodes = 0; // M + 1

    static Grid make(double length, double dx) {
        if (length <= 0.0 || dx <= 0.0)
            throw validation_error("grid: length and dx must be positive");
        const double cells = length / dx;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-9 * cells)
            throw validation_error("grid: dx must divide the domain length");
        Grid g;
        g.length = length;
        g.dx = dx;
        g.nodes = static_cast<std::size_t>(rounded) + 1;
        return g;
    }

    double x(std::size_t i) const { return static_cast<double>(i) * dx; }
};

/// Linear interpolation of nodal values on a uniform grid, clamped to [0, L].
inline double sample_linear(std::span<const double> f, double dx, double x) {
    const std::size_t n = f.size();
    if (n == 0) return 0.0;
    if (n == 1) return f[0];
    const double xmax = static_cast<double>(n - 1) * dx;
    x = std::clamp(x, 0.0, xmax);
    const double pos = x / dx;
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= n - 1) i = n - 2;
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
}

/// Composite trapezoid over nodal values with uniform spacing.
inline double trapezoid(std::span<const double> f, double dx) {
    if (f.size() < 2) return 0.0;
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * dx;
}

/// L2 norm over [0, L] by trapezoid quadrature.
inline double l2_norm(std::span<const double> f, double dx) {
    if (f.size() < 2) return 0.0;
    double acc = 0.5 * (f.front() * f.front() + f.back() * f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i] * f[i];
    return std::sqrt(acc * dx);
}

/// Trapezoid quadrature of `f` over [a, b] with nodes at every multiple of
/// `step` inside the interval plus both endpoints. The node placement is
/// deterministic, which keeps every caller of the same integral bit-identical.
template <class F>
double integrate_aligned(double a, double b, double step, F&& f) {
    if (!(b > a)) return 0.0;
    const double tiny = 1e-12 * std::max(1.0, std::abs(b));
    double acc = 0.0;
    double x0 = a;
    double f0 = f(a);
    // first interior node strictly inside (a, b)
    double k = std::floor(a / step) + 1.0;
    double x1 = k * step;
    while (x1 < b - tiny) {
        if (x1 > a + tiny) {
            const double f1 = f(x1);
            acc += 0.5 * (f0 + f1) * (x1 - x0);
            x0 = x1;
            f0 = f1;
        }
        k += 1.0;
        x1 = k * step;
    }
    const double fb = f(b);
    acc += 0.5 * (f0 + fb) * (b - x0);
    return acc;
}

/// Trapezoid with nodes refined `refine`-fold relative to `step`.
template <class F>
double integrate_aligned(double a, double b, double step, int refine, F&& f) {
    return integrate_aligned(a, b, step / static_cast<double>(refine),
                             std::forward<F>(f));
}

/// log(exp(a) + exp(b)) without overflow; -inf represents zero.
inline double log_add(double a, double b) {
    if (std::isinf(a) && a < 0) return b;
    if (std::isinf(b) && b < 0) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

/// Slope of the least-squares line through (t_i, y_i).
inline double fit_slope(std::span<const double> t, std::span<const double> y) {
    const std::size_t n = std::min(t.size(), y.size());
    if (n < 2) return 0.0;
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i])) continue;
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
        ++used;
    }
    if (used < 2) return 0.0;
    const double d = used * stt - st * st;
    if (d == 0.0) return 0.0;
    return (used * sty - st * sy) / d;
}

} // namespace arzctl
