#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "arzctl/errors.hpp"
#include "arzctl/kernels.hpp"
#include "arzctl/numerics.hpp"

namespace arzctl {

/// Contribution of the diagonalized density state to the forward transform:
/// minus the kernel-weighted integral of z over the road, delta lines
/// included. Piecewise integration keeps the region seams off the quadrature
/// nodes.
inline double transform_state_term(const KernelSet& ks, std::span<const double> z,
                                   double dx, double x, double s) {
    const auto& c = ks.coeffs();
    const double L = ks.length();
    std::vector<double> pts{0.0, L};
    for (double b : {c.c4 * (s - x / c.c1), x - c.c1 * s, x + c.c4 * s,
                     L - c.c1 * s, ks.c_line(x, s)})
        if (b > 0.0 && b < L) pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (b - a < 1e-12) continue;
        const double mid = 0.5 * (a + b);
        switch (ks.classify_gamma(x, s, mid)) {
            case GammaRegion::smooth_plus_pulse:
                integral += integrate_aligned(a, b, dx, [&](double y) {
                    return ks.gamma1(x, s, y) * sample_linear(z, dx, y);
                });
                break;
            case GammaRegion::outlet_tail:
            case GammaRegion::pulse_plus_tail:
                integral += integrate_aligned(a, b, dx, [&](double y) {
                    return ks.gamma3(x, s, y) * sample_linear(z, dx, y);
                });
                break;
            case GammaRegion::outlet_constant:
                integral += integrate_aligned(a, b, dx, [&](double y) {
                    return ks.gamma4() * sample_linear(z, dx, y);
                });
                break;
            default:
                break;
        }
    }
    double value = -integral;
    for (const auto& d : ks.gamma_dirac(x, s))
        value -= d.weight * sample_linear(z, dx, d.position);
    return value;
}

/// Contribution of the speed state: minus the kernel-weighted integral of v.
/// When the downstream pulse would land beyond the outlet, the boundary trace
/// v(L) takes its place.
inline double transform_speed_term(const KernelSet& ks, std::span<const double> v,
                                   double dx, double x, double s) {
    const auto& c = ks.coeffs();
    const double L = ks.length();
    double value = 0.0;
    const double plateau_hi = std::min(c.c4 * s - c.c4 / c.c1 * x, L);
    if (plateau_hi > 0.0)
        value -= integrate_aligned(0.0, plateau_hi, dx, [&](double y) {
            return ks.eta1(x) * sample_linear(v, dx, y);
        });
    for (const auto& d : ks.eta_dirac(x, s))
        value -= d.weight * sample_linear(v, dx, d.position);
    if (x + c.c4 * s > L) value -= c.k / c.c6 * v.back();
    return value;
}

/// Contribution of the in-flight input history: the identity plus Volterra
/// corrections along both characteristic families. `psi` is a continuous
/// sampler psi(position, clock) with clock in [0, s].
template <class Psi>
double transform_transport_term(const KernelSet& ks, Psi&& psi, double x,
                                double s, double tau_step, double y_step) {
    const auto& c = ks.coeffs();
    const double L = ks.length();
    if (x < 0.0 || x > L || s < 0.0 || s > c.D + 1e-12)
        throw validation_error("transform: point outside the domain");
    const auto gker = [&](double y, double tau) {
        return c.k * c.c1 * c.c2 / (c.c1 + c.c4) *
               std::exp(-c.c1 * c.c2 / (c.c1 + c.c4) * (x - y + c.c4 * tau));
    };
    double value = psi(x, s);
    if (x <= c.c1 * s) {
        const double tx = x / c.c1;
        value -= integrate_aligned(0.0, tx, tau_step, [&](double tau) {
            return c.c1 * c.c2 * std::exp(-c.c1 * c.c2 * tau) *
                   psi(x - c.c1 * tau, s - tau);
        });
        value += integrate_aligned(tx, s, tau_step, [&](double tau) {
            return c.c5 * c.c7 * std::exp(-c.c2 * x) *
                   psi(c.c4 * (tau - tx), s - tau);
        });
        value += integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return c.k * psi(x + c.c4 * tau, s - tau);
        });
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            const double ylo = std::max(x - c.c1 * tau, c.c4 * (tau - tx));
            const double yhi = x + c.c4 * tau;
            if (yhi <= ylo) return 0.0;
            return integrate_aligned(ylo, yhi, y_step, [&](double y) {
                return gker(y, tau) * psi(y, s - tau);
            });
        });
    } else if (x <= L - c.c4 * s) {
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return c.c1 * c.c2 * std::exp(-c.c1 * c.c2 * tau) *
                   psi(x - c.c1 * tau, s - tau);
        });
        value += integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return c.k * psi(x + c.c4 * tau, s - tau);
        });
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return integrate_aligned(x - c.c1 * tau, x + c.c4 * tau, y_step,
                                     [&](double y) { return gker(y, tau) * psi(y, s - tau); });
        });
    } else {
        const double tL = (L - x) / c.c4;
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return c.c1 * c.c2 * std::exp(-c.c1 * c.c2 * tau) *
                   psi(x - c.c1 * tau, s - tau);
        });
        value += integrate_aligned(0.0, tL, tau_step, [&](double tau) {
            return c.k * psi(x + c.c4 * tau, s - tau);
        });
        value += integrate_aligned(tL, s, tau_step, [&](double tau) {
            return c.k * psi(L, s - tau);
        });
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            const double yhi = std::min(x + c.c4 * tau, ks.c_line(x, tau));
            const double ylo = x - c.c1 * tau;
            if (yhi <= ylo) return 0.0;
            return integrate_aligned(ylo, yhi, y_step, [&](double y) {
                return gker(y, tau) * psi(y, s - tau);
            });
        });
        value -= integrate_aligned(tL, s, tau_step, [&](double tau) {
            const double ylo = ks.c_line(x, tau);
            if (ylo >= L) return 0.0;
            return integrate_aligned(ylo, L, y_step, [&](double y) {
                return c.k * c.c2 * std::exp(c.c2 * (y - L)) * psi(y, s - tau);
            });
        });
    }
    return value;
}

/// Forward change of variables: maps the in-flight input state onto the
/// exponentially settling target variable at (x, s).
template <class Psi>
double forward_point(const KernelSet& ks, Psi&& psi, std::span<const double> z,
                     std::span<const double> v, double dx, double x, double s,
                     double tau_step, double y_step) {
    return transform_transport_term(ks, psi, x, s, tau_step, y_step) +
           transform_state_term(ks, z, dx, x, s) +
           transform_speed_term(ks, v, dx, x, s);
}

/// Inverse change of variables: reconstructs the in-flight input state from
/// the target variable and the current road state. `beta` is a continuous
/// sampler beta(position, clock).
template <class Beta>
double inverse_point(const KernelSet& ks, Beta&& beta, std::span<const double> z,
                     std::span<const double> v, double dx, double x, double s,
                     double tau_step, double y_step) {
    const auto& c = ks.coeffs();
    const double L = ks.length();
    if (x < 0.0 || x > L || s < 0.0 || s > c.D + 1e-12)
        throw validation_error("transform: point outside the domain");
    const double kk = c.k;
    const auto qker = [&](double y, double tau) {
        return kk * c.c1 * c.c2 / (c.c1 + c.c4) *
               std::exp(kk * (x - y - c.c1 * tau) / (c.c1 + c.c4));
    };
    const auto rker = [&](double y) {
        return kk * c.c1 * c.c2 / (c.c6 * (c.c1 + c.c4)) *
               std::exp(kk * (x - y - c.c1 * s) / (c.c1 + c.c4));
    };
    double value = beta(x, s);
    if (x < c.c1 * s) {
        const double tx = x / c.c1;
        value -= integrate_aligned(tx, s, tau_step, [&](double tau) {
            return integrate_aligned(c.c4 * (tau - tx), x + c.c4 * tau, y_step,
                                     [&](double y) { return qker(y, tau) * beta(y, s - tau); });
        });
        value -= integrate_aligned(0.0, tx, tau_step, [&](double tau) {
            return integrate_aligned(x - c.c1 * tau, x + c.c4 * tau, y_step,
                                     [&](double y) { return qker(y, tau) * beta(y, s - tau); });
        });
        value -= integrate_aligned(tx, s, tau_step, [&](double tau) {
            return c.c2 * c.c4 * std::exp(kk * (tx - tau)) *
                   beta(c.c4 * (tau - tx), s - tau);
        });
        value += integrate_aligned(0.0, tx, tau_step, [&](double tau) {
            return c.c1 * c.c2 * beta(x - c.c1 * tau, s - tau);
        });
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return kk * std::exp(-kk * tau) * beta(x + c.c4 * tau, s - tau);
        });
        value += c.c2 * c.c4 / c.c6 * std::exp(kk * (tx - s)) *
                 sample_linear(v, dx, c.c4 * (s - tx));
        value += kk / c.c6 * std::exp(-kk * s) * sample_linear(v, dx, x + c.c4 * s);
        value += integrate_aligned(c.c4 * (s - tx), x + c.c4 * s, y_step,
                                   [&](double y) { return rker(y) * sample_linear(v, dx, y); });
    } else if (x <= L - c.c4 * s) {
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return integrate_aligned(x - c.c1 * tau, x + c.c4 * tau, y_step,
                                     [&](double y) { return qker(y, tau) * beta(y, s - tau); });
        });
        value += integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return c.c1 * c.c2 * beta(x - c.c1 * tau, s - tau);
        });
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return kk * std::exp(-kk * tau) * beta(x + c.c4 * tau, s - tau);
        });
        value += kk / c.c6 * std::exp(-kk * s) * sample_linear(v, dx, x + c.c4 * s);
        value += integrate_aligned(x - c.c1 * s, x + c.c4 * s, y_step,
                                   [&](double y) { return rker(y) * sample_linear(v, dx, y); });
        value += -c.c5 / c.c6 * std::exp(c.c2 * (c.c1 * s - x)) *
                 sample_linear(z, dx, x - c.c1 * s);
    } else {
        const double tL = (L - x) / c.c4;
        value -= integrate_aligned(0.0, s, tau_step, [&](double tau) {
            const double yhi = std::min(L, x + c.c4 * tau);
            return integrate_aligned(x - c.c1 * tau, yhi, y_step,
                                     [&](double y) { return qker(y, tau) * beta(y, s - tau); });
        });
        value += integrate_aligned(0.0, s, tau_step, [&](double tau) {
            return c.c1 * c.c2 * beta(x - c.c1 * tau, s - tau);
        });
        value -= integrate_aligned(tL, s, tau_step, [&](double tau) {
            return (c.c1 * c.c2 * std::exp(kk * (x - L - c.c1 * tau) / (c.c1 + c.c4)) -
                    c.c1 * c.c2 * std::exp(-kk * tau) + kk * std::exp(-kk * tau)) *
                   beta(L, s - tau);
        });
        value -= integrate_aligned(0.0, tL, tau_step, [&](double tau) {
            return kk * std::exp(-kk * tau) * beta(x + c.c4 * tau, s - tau);
        });
        value += integrate_aligned(x - c.c1 * s, L, y_step,
                                   [&](double y) { return rker(y) * sample_linear(v, dx, y); });
        value += (c.c1 * c.c2 / c.c6 *
                      (std::exp(kk * (x - L - c.c1 * s) / (c.c1 + c.c4)) - std::exp(-kk * s)) +
                  kk / c.c6 * std::exp(-kk * s)) *
                 v.back();
        value += -c.c5 / c.c6 * std::exp(c.c2 * (c.c1 * s - x)) *
                 sample_linear(z, dx, x - c.c1 * s);
    }
    return value;
}

} // namespace arzctl
