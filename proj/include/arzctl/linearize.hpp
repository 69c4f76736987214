#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "arzctl/errors.hpp"
#include "arzctl/model.hpp"
#include "arzctl/numerics.hpp"

namespace arzctl {

/// Coefficients of the diagonalized linear system around the equilibrium,
/// plus the target-system gain k and the input delay D.
struct LinearCoeffs {
    double c1 = 0.0; // downstream transport speed (m/s)
    double c2 = 0.0; // exponential weight rate (1/m)
    double c3 = 0.0;
    double c4 = 0.0; // upstream transport speed (m/s)
    double c5 = 0.0;
    double c6 = 0.0;
    double c7 = 0.0;
    double k = 0.0;  // target-system gain (1/s)
    double D = 0.0;  // input delay (s)
};

/// Spatial grids of density and speed plus the outlet-boundary ODE state.
struct TrafficField {
    double dx = 0.0;
    std::vector<double> rho; // veh/m, M+1 nodes
    std::vector<double> v;   // m/s, M+1 nodes
    double vL = 0.0;         // outlet ODE state, duplicates v at x = L
};

inline LinearCoeffs coefficients(const Equilibrium& eq, const ModelParams& p,
                                 double k, double D) {
    if (k <= 0.0) throw validation_error("coefficients: gain k must be positive");
    if (D < 0.0) throw validation_error("coefficients: delay D must be nonnegative");
    LinearCoeffs co;
    co.c1 = eq.v_bar;
    co.c2 = 1.0 / (eq.tau_mix * eq.v_bar);
    co.c3 = p.alpha * eq.h_mix_bar * eq.rho_bar * eq.rho_bar /
            (p.tau_acc * p.h_acc_bar * p.h_acc_bar) * (1.0 / eq.rho_bar - p.l);
    co.c4 = p.l / eq.h_mix_bar;
    co.c5 = 1.0 / (eq.rho_bar * eq.rho_bar * eq.tau_mix * eq.h_mix_bar);
    co.c6 = p.alpha / (p.tau_acc * p.h_acc_bar * p.h_acc_bar) * (1.0 / eq.rho_bar - p.l);
    co.c7 = p.l * eq.rho_bar * eq.rho_bar / eq.v_bar;
    co.k = k;
    co.D = D;
    return co;
}

inline bool check_assumption1(const LinearCoeffs& co, double L) {
    return (co.c1 + co.c4) * co.D < L;
}

/// Combined weight h_mix_bar * rho_bar^2 of the coordinate change, recovered
/// from the coefficients themselves so both directions use the same value.
inline double riemann_weight(const LinearCoeffs& co) {
    return co.c1 * co.c2 / co.c5;
}

/// Weighted combination diagonalizing the density/speed error dynamics.
inline std::vector<double> to_riemann(const std::vector<double>& rho_err,
                                      const std::vector<double>& v_err,
                                      const LinearCoeffs& co, double dx) {
    if (rho_err.size() != v_err.size())
        throw validation_error("to_riemann: grid mismatch");
    const double w = riemann_weight(co);
    std::vector<double> z(rho_err.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double x = dx * static_cast<double>(i);
        z[i] = std::exp(co.c2 * x) * (rho_err[i] + w * v_err[i]);
    }
    return z;
}

/// Exact algebraic inverse of to_riemann.
inline std::vector<double> from_riemann(const std::vector<double>& z,
                                        const std::vector<double>& v_err,
                                        const LinearCoeffs& co, double dx) {
    if (z.size() != v_err.size())
        throw validation_error("from_riemann: grid mismatch");
    const double w = riemann_weight(co);
    std::vector<double> rho_err(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double x = dx * static_cast<double>(i);
        rho_err[i] = std::exp(-co.c2 * x) * z[i] - w * v_err[i];
    }
    return rho_err;
}

struct LinearRates {
    std::vector<double> z_t;
    std::vector<double> v_t;
    double vL_t = 0.0;
};

/// Right-hand side of the diagonalized linear system with delayed input.
/// Upwinded first-order differences: backward for the downstream z transport,
/// forward for the upstream v transport. The inlet relation z(0) = -c7 v(0)
/// is algebraic and must be reimposed by the stepper.
inline LinearRates linear_rhs(const std::vector<double>& z,
                              const std::vector<double>& v,
                              double vL,
                              const std::vector<double>& u_delayed,
                              const LinearCoeffs& co, double dx) {
    const std::size_t n = z.size();
    if (v.size() != n || u_delayed.size() != n)
        throw validation_error("linear_rhs: grid mismatch");
    LinearRates r;
    r.z_t.assign(n, 0.0);
    r.v_t.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = dx * static_cast<double>(i);
        const double zx = (i == 0) ? 0.0 : (z[i] - z[i - 1]) / dx;
        r.z_t[i] = -co.c1 * zx - std::exp(co.c2 * x) * co.c3 * u_delayed[i];
        if (i + 1 < n) {
            const double vx = (v[i + 1] - v[i]) / dx;
            r.v_t[i] = co.c4 * vx - co.c5 * std::exp(-co.c2 * x) * z[i] -
                       co.c6 * u_delayed[i];
        }
    }
    const double xl = dx * static_cast<double>(n - 1);
    r.vL_t = -co.c5 * std::exp(-co.c2 * xl) * z[n - 1] - co.c6 * u_delayed[n - 1];
    r.v_t[n - 1] = r.vL_t;
    return r;
}

} // namespace arzctl
