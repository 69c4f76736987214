#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "arzctl/errors.hpp"

namespace arzctl {

/// Physical constants of the mixed manual/ACC traffic model. All values SI
/// (m, s, veh/m); unit conversion happens at config ingestion.
struct ModelParams {
    double L = 1000.0;        // road length (m)
    double l = 5.0;           // effective vehicle length (m)
    double q_in = 1200.0 / 3600.0; // inflow (veh/s)
    double tau_acc = 2.0;     // ACC relaxation time (s)
    double tau_m = 60.0;      // manual relaxation time (s)
    double h_m = 1.0;         // manual time gap (s)
    double h_acc_bar = 1.5;   // steady ACC time gap (s)
    double alpha = 0.15;      // ACC penetration fraction
    double h_min = 0.8;       // lowest admissible time gap (s)
    double h_max = 2.2;       // highest admissible time gap (s)
    double rho_min = 37.0 / 1000.0; // lowest congested density (veh/m)
    std::optional<double> v_f;      // free-flow speed (m/s), optional

    void validate() const {
        if (L <= 0 || l <= 0 || q_in <= 0 || tau_acc <= 0 || tau_m <= 0 ||
            h_m <= 0 || h_acc_bar <= 0 || rho_min <= 0)
            throw validation_error("model: lengths, times and flows must be positive");
        if (alpha < 0.0 || alpha > 1.0)
            throw validation_error("model: alpha must lie in [0,1]");
        if (h_min > std::min(h_acc_bar, h_m))
            throw validation_error("model: h_min must not exceed min(h_acc_bar, h_m)");
        if (h_max < std::max(h_acc_bar, h_m))
            throw validation_error("model: h_max must be at least max(h_acc_bar, h_m)");
        if (v_f && *v_f <= 0)
            throw validation_error("model: v_f must be positive when given");
    }
};

/// Steady state dictated by constant inflow and constant ACC time gap.
struct Equilibrium {
    double v_bar = 0.0;     // m/s
    double rho_bar = 0.0;   // veh/m
    double h_mix_bar = 0.0; // s
    double tau_mix = 0.0;   // s
};

/// Harmonic blend of the two relaxation times by penetration fraction.
inline double mixed_time_constant(double alpha, double tau_acc, double tau_m) {
    if (alpha < 0.0 || alpha > 1.0)
        throw validation_error("mixed_time_constant: alpha outside [0,1]");
    if (tau_acc <= 0.0 || tau_m <= 0.0)
        throw validation_error("mixed_time_constant: time constants must be positive");
    return 1.0 / (alpha / tau_acc + (1.0 - alpha) / tau_m);
}

/// Effective time gap of the manual/ACC mixture for a given ACC gap.
inline double mixed_time_gap(double h_acc, const ModelParams& p) {
    if (h_acc <= 0.0)
        throw validation_error("mixed_time_gap: h_acc must be positive");
    const double w = p.alpha + (1.0 - p.alpha) * (p.tau_acc / p.tau_m);
    const double denom = p.alpha + (1.0 - p.alpha) * (p.tau_acc / p.tau_m) * (h_acc / p.h_m);
    return w / denom * h_acc;
}

/// Equilibrium speed profile of the mixed flow at a given density and ACC gap.
inline double v_mix(double rho, double h_acc, const ModelParams& p) {
    if (rho <= 0.0 || rho > 1.0 / p.l)
        throw validation_error("v_mix: density outside (0, 1/l]");
    return (1.0 / mixed_time_gap(h_acc, p)) * (1.0 / rho - p.l);
}

/// Fundamental-diagram flow: rho times the mixed equilibrium speed.
inline double flow_q(double rho, double h_acc, const ModelParams& p) {
    return rho * v_mix(rho, h_acc, p);
}

/// Solve for the steady state from the inflow and the nominal ACC gap.
inline Equilibrium equilibrium(const ModelParams& p) {
    p.validate();
    Equilibrium eq;
    eq.h_mix_bar = mixed_time_gap(p.h_acc_bar, p);
    eq.tau_mix = mixed_time_constant(p.alpha, p.tau_acc, p.tau_m);
    const double inv_q = 1.0 / p.q_in;
    if (inv_q <= eq.h_mix_bar)
        throw validation_error("equilibrium: inflow too large, 1/q_in must exceed h_mix_bar");
    eq.v_bar = p.l / (inv_q - eq.h_mix_bar);
    eq.rho_bar = 1.0 / (p.l + eq.h_mix_bar * eq.v_bar);
    if (eq.rho_bar < p.rho_min || eq.rho_bar > 1.0 / p.l)
        throw validation_error("equilibrium: steady density leaves the feasible set");
    if (p.v_f && eq.v_bar > *p.v_f)
        throw validation_error("equilibrium: steady speed exceeds the free-flow speed");
    return eq;
}

/// Feasible-set membership; boundaries inclusive. When v_f is not supplied the
/// speed upper bound is skipped.
inline bool in_feasible_set(double rho, double v, double h_acc, const ModelParams& p) {
    if (v < 0.0) return false;
    if (p.v_f && v > *p.v_f) return false;
    if (rho < p.rho_min || rho > 1.0 / p.l) return false;
    if (h_acc < p.h_min || h_acc > p.h_max) return false;
    return true;
}

} // namespace arzctl
