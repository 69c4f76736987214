#pragma once

#include <cmath>
#include <vector>

#include "arzctl/errors.hpp"
#include "arzctl/linearize.hpp"

namespace arzctl {

/// A delta line in the spatial kernel argument y, carried symbolically: the
/// integral of kernel * f over y picks up weight * f(position). The stated
/// weight already absorbs the 1/|slope| Jacobian of the delta argument.
struct DiracLine {
    double position = 0.0;
    double weight = 0.0;
};

enum class GammaRegion {
    smooth_plus_pulse,  // constant-in-(s,y) exponential plus the transport pulse
    pulse_only,         // only the transport pulse, zero smooth part
    outlet_tail,        // exponential tail fed by the outlet reflection
    pulse_plus_tail,    // both the pulse and the outlet-fed tail
    outlet_constant,    // constant plateau next to y = L
    zero
};

enum class EtaRegion {
    plateau_plus_pulse, // constant plateau plus the reflected pulse
    pulse_only,
    gain_pulse,         // pure delta carrying the target gain
    zero
};

/// Closed-form backstepping kernels for the diagonalized system, split into
/// smooth parts (returned as values) and delta lines (returned as
/// descriptors). Immutable after construction, safe to share across threads.
class KernelSet {
public:
    KernelSet(const LinearCoeffs& co, double L) : co_(co), L_(L) {
        if (!check_assumption1(co, L))
            throw validation_error("kernels: (c1+c4)D must be less than L");
    }

    const LinearCoeffs& coeffs() const { return co_; }
    double length() const { return L_; }

    // boundary of the outlet-fed constant plateau at slice s and abscissa x
    double c_line(double x, double s) const {
        return (co_.c1 + co_.c4) / co_.c4 * L_ - co_.c1 / co_.c4 * x - co_.c1 * s;
    }

    GammaRegion classify_gamma(double x, double s, double y) const {
        require_t1(x, s, y);
        const auto& c = co_;
        // branch order as the region table lists them; first match wins
        if (s >= x / c.c1 && y >= 0.0 && y <= c.c4 * (s - x / c.c1))
            return GammaRegion::smooth_plus_pulse;
        if ((y > x + c.c4 * s && y <= L_ - c.c1 * s) || (y >= 0.0 && y <= x - c.c1 * s))
            return GammaRegion::pulse_only;
        if (y > L_ - c.c1 * s && y <= std::min(x + c.c4 * s, c_line(x, s)))
            return GammaRegion::outlet_tail;
        if (y > std::max(c.c4 * (s - x / c.c1), x - c.c1 * s) &&
            y <= std::min(x + c.c4 * s, L_ - c.c1 * s))
            return GammaRegion::pulse_plus_tail;
        if (y >= c_line(x, s) && y <= L_)
            return GammaRegion::outlet_constant;
        return GammaRegion::zero;
    }

    EtaRegion classify_eta(double x, double s, double y) const {
        require_t1(x, s, y);
        const auto& c = co_;
        if (y >= 0.0 && y <= c.c4 * s - c.c4 / c.c1 * x)
            return EtaRegion::plateau_plus_pulse;
        if (y > std::max(c.c4 * s - c.c4 / c.c1 * x, 0.0) && y <= c.c4 * s)
            return EtaRegion::pulse_only;
        if (y > c.c4 * s && y <= L_)
            return EtaRegion::gain_pulse;
        return EtaRegion::zero;
    }

    // the four smooth building blocks
    double gamma1(double x, double, double y) const {
        const auto& c = co_;
        return -c.c5 * (c.k + c.c5 * c.c7) / (c.c6 * (c.c1 + c.c4)) *
               std::exp(-c.c2 * (x + y));
    }
    double gamma3(double x, double s, double y) const {
        const auto& c = co_;
        return -c.k * c.c5 / (c.c6 * (c.c1 + c.c4)) *
               std::exp(-c.c1 * c.c2 / (c.c1 + c.c4) * x -
                        c.c2 * c.c4 / (c.c1 + c.c4) * (y + c.c1 * s));
    }
    double gamma4() const {
        const auto& c = co_;
        return -c.k * c.c5 / (c.c1 * c.c6) * std::exp(-c.c2 * L_);
    }
    double eta1(double x) const {
        const auto& c = co_;
        return c.c1 * c.c5 * c.c7 * (c.k + c.c5 * c.c7) /
               (c.c4 * c.c6 * (c.c1 + c.c4)) * std::exp(-c.c2 * x);
    }

    /// Non-delta part of the gamma kernel in the active region.
    double gamma_smooth(double x, double s, double y) const {
        switch (classify_gamma(x, s, y)) {
            case GammaRegion::smooth_plus_pulse: return gamma1(x, s, y);
            case GammaRegion::pulse_only: return 0.0;
            case GammaRegion::outlet_tail: return gamma3(x, s, y);
            case GammaRegion::pulse_plus_tail: return gamma3(x, s, y);
            case GammaRegion::outlet_constant: return gamma4();
            case GammaRegion::zero: return 0.0;
        }
        return 0.0;
    }

    /// Non-delta part of the eta kernel in the active region.
    double eta_smooth(double x, double s, double y) const {
        switch (classify_eta(x, s, y)) {
            case EtaRegion::plateau_plus_pulse: return eta1(x);
            default: return 0.0;
        }
    }

    /// Delta lines of gamma at slice (x, s), as point evaluations in y.
    std::vector<DiracLine> gamma_dirac(double x, double s) const {
        std::vector<DiracLine> lines;
        const auto& c = co_;
        const double y0 = x - c.c1 * s; // delta argument x - y - c1 s has unit slope
        if (y0 >= 0.0 && y0 <= L_)
            lines.push_back({y0, -c.c5 / c.c6 * std::exp(-c.c2 * x)});
        return lines;
    }

    /// Delta lines of eta at slice (x, s). The reflected pulse sits on
    /// y = (c4/c1)(c1 s - x); its delta argument has slope c1/c4 in y, so the
    /// point-evaluation weight carries the Jacobian factor c4/c1.
    std::vector<DiracLine> eta_dirac(double x, double s) const {
        std::vector<DiracLine> lines;
        const auto& c = co_;
        // strictly positive: at x = c1 s this line merges with the density
        // pulse at y = 0, which already carries the seam value
        const double y2 = c.c4 / c.c1 * (c.c1 * s - x);
        if (y2 > 0.0 && y2 <= L_)
            lines.push_back({y2, c.c5 * c.c7 / c.c6 * std::exp(-c.c2 * x)});
        const double y3 = x + c.c4 * s; // argument x - y + c4 s, unit slope
        if (y3 >= 0.0 && y3 <= L_)
            lines.push_back({y3, c.k / c.c6});
        return lines;
    }

    /// Boundary reflection kernel: the time integral of the outlet trace of
    /// eta, which collapses to a step because only the gain pulse reaches
    /// y = L for small s.
    double r_kernel(double x, double s) const {
        if (x < 0.0 || x > L_ || s < 0.0 || s > co_.D)
            throw validation_error("r_kernel: point outside the kernel domain");
        return (x > L_ - co_.c4 * s) ? co_.k / co_.c6 : 0.0;
    }

    /// Smooth part of the composed history kernel. Delta content follows from
    /// gamma_dirac / eta_dirac at the shifted slice plus a boundary delta at
    /// y = L with weight -c6 * r_kernel(x, s - r).
    double g_smooth(double x, double s, double y, double r) const {
        if (r < 0.0 || r > s)
            throw validation_error("g_kernel: requires 0 <= r <= s");
        const auto& c = co_;
        return -c.c3 * std::exp(c.c2 * y) * gamma_smooth(x, s - r, y) -
               c.c6 * eta_smooth(x, s - r, y);
    }

    std::vector<DiracLine> g_dirac(double x, double s, double r) const {
        const auto& c = co_;
        std::vector<DiracLine> lines;
        for (const auto& d : gamma_dirac(x, s - r))
            lines.push_back({d.position, -c.c3 * std::exp(c.c2 * d.position) * d.weight});
        for (const auto& d : eta_dirac(x, s - r))
            lines.push_back({d.position, -c.c6 * d.weight});
        const double rw = r_kernel(x, s - r);
        if (rw != 0.0)
            lines.push_back({L_, -c.c6 * rw});
        return lines;
    }

private:
    void require_t1(double x, double s, double y) const {
        if (x < 0.0 || x > L_ || y < 0.0 || y > L_ || s < 0.0 || s > co_.D)
            throw validation_error("kernels: point outside the kernel domain");
    }

    LinearCoeffs co_;
    double L_;
};

} // namespace arzctl
