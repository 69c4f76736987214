#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "arzctl/errors.hpp"
#include "arzctl/history.hpp"
#include "arzctl/kernels.hpp"
#include "arzctl/linearize.hpp"
#include "arzctl/model.hpp"
#include "arzctl/numerics.hpp"
#include "arzctl/transforms.hpp"

namespace arzctl {

/// Physical time-gap command plus the number of nodes clipped to the
/// admissible interval.
struct GapCommand {
    std::vector<double> h_acc;
    int saturated = 0;
};

/// Predictor feedback for the delayed distributed input. The command at time
/// t is the field u that zeroes the target variable at the top of the
/// transport clock, beta(x, D) = 0 for every x, given the current road state
/// and the in-flight input history. The defining equation is affine in u and
/// the unknown enters only through the newest sliver of the clock, so a plain
/// fixed-point sweep contracts fast.
class PredictorController {
public:
    PredictorController(KernelSet ks, std::size_t nx, double tau_step)
        : ks_(std::move(ks)), nx_(nx), tau_step_(tau_step) {
        if (nx_ < 2)
            throw validation_error("controller: need at least two grid nodes");
        if (tau_step_ <= 0.0)
            throw validation_error("controller: quadrature step must be positive");
        dx_ = ks_.length() / static_cast<double>(nx_ - 1);
    }

    const KernelSet& kernels() const { return ks_; }
    std::size_t nodes() const { return nx_; }
    double dx() const { return dx_; }

    /// Delay-compensating command for the diagonalized linear system.
    /// `v.back()` is replaced by the outlet ODE state vL before use.
    std::vector<double> compute_control_linear(const ControlHistory& hist,
                                               std::span<const double> z,
                                               std::span<const double> v,
                                               double vL) const {
        check_fields(z, v);
        std::vector<double> vv(v.begin(), v.end());
        vv.back() = vL;
        const std::vector<double> sp = state_part(z, vv);
        std::vector<double> u(nx_, 0.0);
        auto psi = [&](double y, double sg) { return hist.sample(y, sg, u); };
        zero_target(psi, sp, u, [](std::span<double>) {});
        return u;
    }

    /// State feedback designed for zero delay: the algebraic solution of
    /// beta(x, 0) = 0. Used as the uncompensated baseline.
    std::vector<double> baseline_control(std::span<const double> z,
                                         std::span<const double> v,
                                         double vL) const {
        check_fields(z, v);
        const auto& c = ks_.coeffs();
        std::vector<double> u(nx_);
        for (std::size_t i = 0; i < nx_; ++i) {
            const double x = dx_ * static_cast<double>(i);
            const double vi = (i + 1 == nx_) ? vL : v[i];
            u[i] = -c.c5 / c.c6 * std::exp(-c.c2 * x) * z[i] + c.k / c.c6 * vi;
        }
        return u;
    }

    /// Time-gap command for the physical system. `hist` holds the absolute
    /// commands issued so far (prehistory should sit at the nominal gap);
    /// the law is the linear one applied to the deviation variables, shifted
    /// back and clipped to the admissible interval.
    GapCommand compute_control_physical(const ControlHistory& hist,
                                        std::span<const double> rho,
                                        std::span<const double> v,
                                        double vL,
                                        const Equilibrium& eq,
                                        const ModelParams& p) const {
        check_fields(rho, v);
        const auto& c = ks_.coeffs();
        std::vector<double> rho_err(nx_), v_err(nx_);
        for (std::size_t i = 0; i < nx_; ++i) {
            rho_err[i] = rho[i] - eq.rho_bar;
            v_err[i] = ((i + 1 == nx_) ? vL : v[i]) - eq.v_bar;
        }
        const std::vector<double> z = to_riemann(rho_err, v_err, c, dx_);
        const std::vector<double> sp = state_part(z, v_err);
        const double hbar = p.h_acc_bar;

        std::vector<double> u(nx_, 0.0);
        std::vector<double> absolute(nx_, hbar);
        auto psi = [&](double y, double sg) {
            return hist.sample(y, sg, absolute) - hbar;
        };
        zero_target(psi, sp, u, [&](std::span<double> cur) {
            for (std::size_t i = 0; i < nx_; ++i) absolute[i] = hbar + cur[i];
        });

        GapCommand out;
        out.h_acc.resize(nx_);
        for (std::size_t i = 0; i < nx_; ++i) {
            const double raw = hbar + u[i];
            const double clipped = std::clamp(raw, p.h_min, p.h_max);
            if (clipped != raw) ++out.saturated;
            out.h_acc[i] = clipped;
        }
        return out;
    }

    /// One pointwise correction of an already-solved command at an arbitrary
    /// position: the solved field enters through interpolation and the local
    /// residual is removed. Used to probe the law between grid nodes.
    double command_at(const ControlHistory& hist, std::span<const double> z,
                      std::span<const double> v, double vL,
                      std::span<const double> u, double x,
                      double tau_step, double y_step = 0.0) const {
        check_fields(z, v);
        if (y_step <= 0.0) y_step = dx_;
        std::vector<double> vv(v.begin(), v.end());
        vv.back() = vL;
        auto psi = [&](double y, double sg) { return hist.sample(y, sg, u); };
        const double beta = forward_point(ks_, psi, z, vv, dx_, x,
                                          ks_.coeffs().D, tau_step, y_step);
        return sample_linear(u, dx_, x) - beta;
    }

private:
    void check_fields(std::span<const double> a, std::span<const double> b) const {
        if (a.size() != nx_ || b.size() != nx_)
            throw validation_error("controller: field width does not match the grid");
    }

    // contribution of the road state to beta(x, D); independent of the input
    std::vector<double> state_part(std::span<const double> z,
                                   std::span<const double> v) const {
        std::vector<double> sp(nx_);
        const double D = ks_.coeffs().D;
        for (std::size_t i = 0; i < nx_; ++i) {
            const double x = dx_ * static_cast<double>(i);
            sp[i] = transform_state_term(ks_, z, dx_, x, D) +
                    transform_speed_term(ks_, v, dx_, x, D);
        }
        return sp;
    }

    template <class Psi, class Sync>
    void zero_target(const Psi& psi, std::span<const double> sp,
                     std::vector<double>& u, const Sync& sync) const {
        const double D = ks_.coeffs().D;
        std::vector<double> r(nx_);
        double state_scale = 1.0;
        for (double s : sp) state_scale = std::max(state_scale, std::abs(s));
        for (int it = 0; it < 80; ++it) {
            double worst = 0.0, scale = state_scale;
            for (std::size_t i = 0; i < nx_; ++i) {
                const double x = dx_ * static_cast<double>(i);
                r[i] = transform_transport_term(ks_, psi, x, D, tau_step_, dx_) +
                       sp[i];
                worst = std::max(worst, std::abs(r[i]));
                scale = std::max(scale, std::abs(u[i]));
            }
            if (worst <= 1e-13 * scale) return;
            for (std::size_t i = 0; i < nx_; ++i) u[i] -= r[i];
            sync(u);
        }
        throw divergence_error("controller: fixed point did not converge");
    }

    KernelSet ks_;
    std::size_t nx_;
    double tau_step_;
    double dx_ = 0.0;
};

} // namespace arzctl
