#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "arzctl/kernel_oracle.hpp"
#include "arzctl/kernels.hpp"
#include "arzctl/model.hpp"

using namespace arzctl;

namespace {

constexpr double kKernelL = 100.0; // short domain used for kernel studies

LinearCoeffs fig_coeffs() {
    ModelParams p;
    return coefficients(equilibrium(p), p, 0.1, 4.0);
}

KernelSet make_kernels() { return KernelSet(fig_coeffs(), kKernelL); }

// Rejection-sample a point strictly inside the requested gamma region: the
// classification must be stable under a +-margin wiggle in every coordinate.
template <class Rng>
bool sample_gamma_region(Rng& rng, const KernelSet& ks, GammaRegion target,
                         double margin, double& x, double& s, double& y) {
    std::uniform_real_distribution<double> xd(0.0, kKernelL);
    std::uniform_real_distribution<double> sd(0.05, ks.coeffs().D);
    for (int tries = 0; tries < 200000; ++tries) {
        x = xd(rng);
        s = sd(rng);
        y = xd(rng);
        if (ks.classify_gamma(x, s, y) != target) continue;
        bool stable = true;
        for (double dy : {-margin, margin}) {
            const double yy = std::clamp(y + dy, 0.0, kKernelL);
            if (ks.classify_gamma(x, s, yy) != target) { stable = false; break; }
        }
        if (!stable) continue;
        for (double dx : {-margin, margin}) {
            const double xx = std::clamp(x + dx, 0.0, kKernelL);
            if (ks.classify_gamma(xx, s, y) != target) { stable = false; break; }
        }
        if (stable) return true;
    }
    return false;
}

} // namespace

TEST_CASE("gamma region table matches direct predicate evaluation") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> xd(0.0, kKernelL);
    std::uniform_real_distribution<double> sd(0.0, c.D);
    const double m = 1e-6;
    int checked = 0;
    for (int i = 0; i < 20000; ++i) {
        const double x = xd(rng), s = sd(rng), y = xd(rng);
        const double cl = (c.c1 + c.c4) / c.c4 * kKernelL - c.c1 / c.c4 * x - c.c1 * s;
        const bool in_a = s * c.c1 >= x && y <= c.c4 * (s - x / c.c1);
        const bool in_b = (y > x + c.c4 * s && y <= kKernelL - c.c1 * s) ||
                          (y <= x - c.c1 * s);
        const bool in_c = y > kKernelL - c.c1 * s &&
                          y <= std::min(x + c.c4 * s, cl);
        const bool in_d = y > std::max(c.c4 * (s - x / c.c1), x - c.c1 * s) &&
                          y <= std::min(x + c.c4 * s, kKernelL - c.c1 * s);
        const bool in_e = y >= cl;
        // skip points within a hair of any region boundary
        const double dists[] = {std::abs(y - c.c4 * (s - x / c.c1)),
                                std::abs(y - (x + c.c4 * s)),
                                std::abs(y - (kKernelL - c.c1 * s)),
                                std::abs(y - (x - c.c1 * s)),
                                std::abs(y - cl)};
        bool near = false;
        for (double d : dists) near = near || d < m;
        if (near) continue;
        const int hits = int(in_a) + int(in_b) + int(in_c) + int(in_d) + int(in_e);
        // the first-match table must agree with the unique active predicate
        const GammaRegion r = ks.classify_gamma(x, s, y);
        if (hits == 0) {
            CHECK(r == GammaRegion::zero);
        } else {
            REQUIRE(hits == 1);
            if (in_a) CHECK(r == GammaRegion::smooth_plus_pulse);
            if (in_b) CHECK(r == GammaRegion::pulse_only);
            if (in_c) CHECK(r == GammaRegion::outlet_tail);
            if (in_d) CHECK(r == GammaRegion::pulse_plus_tail);
            if (in_e) CHECK(r == GammaRegion::outlet_constant);
        }
        ++checked;
    }
    CHECK(checked > 15000);
}

TEST_CASE("pulse-only region has no smooth part") {
    const KernelSet ks = make_kernels();
    std::mt19937 rng(7);
    double x, s, y;
    for (int i = 0; i < 50; ++i) {
        REQUIRE(sample_gamma_region(rng, ks, GammaRegion::pulse_only, 1e-3, x, s, y));
        CHECK(ks.gamma_smooth(x, s, y) == 0.0);
    }
}

TEST_CASE("outlet plateau is constant") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double expected = -c.k * c.c5 / (c.c1 * c.c6) * std::exp(-c.c2 * kKernelL);
    std::mt19937 rng(8);
    double x, s, y;
    for (int i = 0; i < 50; ++i) {
        REQUIRE(sample_gamma_region(rng, ks, GammaRegion::outlet_constant, 1e-3, x, s, y));
        CHECK(ks.gamma_smooth(x, s, y) == expected);
    }
}

TEST_CASE("eta smooth part is the inlet plateau only") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> xd(0.0, kKernelL);
    std::uniform_real_distribution<double> sd(0.1, c.D);
    for (int i = 0; i < 2000; ++i) {
        const double x = xd(rng), s = sd(rng), y = xd(rng);
        const EtaRegion r = ks.classify_eta(x, s, y);
        const double v = ks.eta_smooth(x, s, y);
        if (r == EtaRegion::plateau_plus_pulse) {
            CHECK(v == Catch::Approx(c.c1 * c.c5 * c.c7 * (c.k + c.c5 * c.c7) /
                                     (c.c4 * c.c6 * (c.c1 + c.c4)) *
                                     std::exp(-c.c2 * x)).epsilon(1e-14));
        } else {
            CHECK(v == 0.0);
        }
        if (y > c.c4 * s) CHECK(r == EtaRegion::gain_pulse);
    }
}

TEST_CASE("boundary reflection kernel is a step") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    for (double x : {0.0, 30.0, 60.0, 99.0}) {
        CHECK(ks.r_kernel(x, 0.0) == 0.0);
        for (double s : {0.5, 2.0, 4.0}) {
            const double expect = (x > kKernelL - c.c4 * s) ? c.k / c.c6 : 0.0;
            CHECK(ks.r_kernel(x, s) == expect);
        }
    }
    CHECK_THROWS_AS(ks.r_kernel(-1.0, 1.0), validation_error);
}

TEST_CASE("history kernel composes the other kernels and rides on s - r") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> xd(0.0, kKernelL);
    std::uniform_real_distribution<double> sd(0.1, c.D);
    for (int i = 0; i < 500; ++i) {
        const double x = xd(rng), s = sd(rng), y = xd(rng);
        std::uniform_real_distribution<double> rd(0.0, s);
        const double r = rd(rng);
        const double g = ks.g_smooth(x, s, y, r);
        CHECK(g == Catch::Approx(-c.c3 * std::exp(c.c2 * y) * ks.gamma_smooth(x, s - r, y) -
                                 c.c6 * ks.eta_smooth(x, s - r, y)).margin(1e-15));
        CHECK(g == ks.g_smooth(x, s - r, y, 0.0));
        // in the interior wedge the composition collapses to the transport kernel
        const double tau = s - r;
        switch (ks.classify_gamma(x, tau, y)) {
            case GammaRegion::pulse_plus_tail:
            case GammaRegion::outlet_tail:
                if (ks.classify_eta(x, tau, y) == EtaRegion::gain_pulse ||
                    ks.classify_eta(x, tau, y) == EtaRegion::zero) {
                    const double wedge = c.k * c.c1 * c.c2 / (c.c1 + c.c4) *
                                         std::exp(-c.c1 * c.c2 / (c.c1 + c.c4) *
                                                  (x - y + c.c4 * tau));
                    CHECK(g == Catch::Approx(wedge).epsilon(1e-12));
                }
                break;
            case GammaRegion::outlet_constant:
                CHECK(g == Catch::Approx(c.k * c.c2 *
                                         std::exp(c.c2 * (y - kKernelL))).epsilon(1e-12));
                break;
            default:
                break;
        }
    }
    // at r = s both constituent kernels are pure deltas
    CHECK(ks.g_smooth(40.0, 2.0, 55.0, 2.0) == 0.0);
    CHECK_THROWS_AS(ks.g_smooth(40.0, 2.0, 55.0, 3.0), validation_error);
}

TEST_CASE("kernel boundary traces") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> xd(0.0, kKernelL);
    std::uniform_real_distribution<double> sd(0.01, c.D);
    for (int i = 0; i < 1000; ++i) {
        const double x = xd(rng), s = sd(rng);
        // outlet trace of gamma ties to the reflection kernel
        if (std::abs(x - (kKernelL - c.c4 * s)) > 1e-6) {
            CHECK(ks.gamma_smooth(x, s, kKernelL) ==
                  Catch::Approx(-c.c5 / c.c1 * std::exp(-c.c2 * kKernelL) *
                                ks.r_kernel(x, s)).margin(1e-8));
        }
        // inlet trace of eta ties to the inlet trace of gamma
        if (std::abs(x - c.c1 * s) > 1e-6) {
            CHECK(ks.eta_smooth(x, s, 0.0) ==
                  Catch::Approx(-c.c1 * c.c7 / c.c4 * ks.gamma_smooth(x, s, 0.0))
                      .margin(1e-8));
        }
    }
}

TEST_CASE("transport residuals of the smooth parts away from the delta lines") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double h = 1e-3;
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> xd(2.0 * h, kKernelL - 2.0 * h);
    std::uniform_real_distribution<double> sd(0.1, c.D - 2.0 * h);
    int tested_gamma = 0, tested_eta = 0;
    for (int i = 0; i < 30000 && (tested_gamma < 2000 || tested_eta < 2000); ++i) {
        const double x = xd(rng), s = sd(rng), y = xd(rng);
        // keep clear of every seam and delta line by a few stencil widths
        const double cl = (c.c1 + c.c4) / c.c4 * kKernelL - c.c1 / c.c4 * x - c.c1 * s;
        const double guard = 50.0 * h;
        const double dists[] = {std::abs(y - c.c4 * (s - x / c.c1)),
                                std::abs(y - (x + c.c4 * s)),
                                std::abs(y - (kKernelL - c.c1 * s)),
                                std::abs(y - (x - c.c1 * s)),
                                std::abs(y - cl),
                                std::abs(y - (c.c4 * s - c.c4 / c.c1 * x)),
                                std::abs(y - c.c4 * s)};
        bool clear = true;
        for (double d : dists) clear = clear && d > guard;
        if (!clear) continue;
        if (tested_gamma < 2000) {
            const double gs = (ks.gamma_smooth(x, s + h, y) - ks.gamma_smooth(x, s - h, y)) / (2 * h);
            const double gy = (ks.gamma_smooth(x, s, y + h) - ks.gamma_smooth(x, s, y - h)) / (2 * h);
            const double res = gs - c.c1 * gy +
                               c.c5 * std::exp(-c.c2 * y) * ks.eta_smooth(x, s, y);
            CHECK(std::abs(res) < 1e-4);
            ++tested_gamma;
        }
        if (tested_eta < 2000) {
            const double es = (ks.eta_smooth(x, s + h, y) - ks.eta_smooth(x, s - h, y)) / (2 * h);
            const double ey = (ks.eta_smooth(x, s, y + h) - ks.eta_smooth(x, s, y - h)) / (2 * h);
            CHECK(std::abs(es + c.c4 * ey) < 1e-4);
            ++tested_eta;
        }
    }
    CHECK(tested_gamma >= 2000);
    CHECK(tested_eta >= 2000);
}

TEST_CASE("closed forms match the successive-approximation oracle") {
    const KernelSet ks = make_kernels();
    const KernelOracle oracle(ks.coeffs(), kKernelL);
    std::mt19937 rng(13);
    const GammaRegion regions[] = {GammaRegion::smooth_plus_pulse, GammaRegion::pulse_only,
                                   GammaRegion::outlet_tail, GammaRegion::pulse_plus_tail,
                                   GammaRegion::outlet_constant};
    for (GammaRegion target : regions) {
        double x, s, y;
        for (int i = 0; i < 25; ++i) {
            REQUIRE(sample_gamma_region(rng, ks, target, 1e-2, x, s, y));
            CHECK(ks.gamma_smooth(x, s, y) ==
                  Catch::Approx(oracle.gamma(x, s, y)).margin(1e-6));
        }
    }
    // eta: compare across its whole domain, skipping the delta lines
    const auto& c = ks.coeffs();
    std::uniform_real_distribution<double> xd(0.0, kKernelL);
    std::uniform_real_distribution<double> sd(0.1, c.D);
    int tested = 0;
    while (tested < 200) {
        const double x = xd(rng), s = sd(rng), y = xd(rng);
        if (std::abs(y - (c.c4 * s - c.c4 / c.c1 * x)) < 1e-2) continue;
        if (std::abs(y - c.c4 * s) < 1e-2) continue;
        CHECK(ks.eta_smooth(x, s, y) == Catch::Approx(oracle.eta(x, s, y)).margin(1e-6));
        ++tested;
    }
}

TEST_CASE("successive approximation iterates behave as expected") {
    const LinearCoeffs c = fig_coeffs();
    const KernelOracle oracle(c, kKernelL);

    // first iterate: the pure forcing term in the inlet-fed region
    const double x = 3.0, s = 3.0, y = 2.0;
    REQUIRE(y <= c.c4 * s - c.c4 / c.c1 * x);
    const double expected1 = -c.k * c.c5 / (c.c6 * (c.c1 + c.c4)) *
                             std::exp(-c.c1 * c.c2 / (c.c1 + c.c4) * x -
                                      c.c2 * c.c4 / (c.c1 + c.c4) * (y + c.c1 * s));
    CHECK(oracle.gamma_iterate(x, s, y, 1) == Catch::Approx(expected1).epsilon(1e-12));

    // the iterate sequence converges to the closed form
    const double limit = -c.c5 * (c.k + c.c5 * c.c7) / (c.c6 * (c.c1 + c.c4)) *
                         std::exp(-c.c2 * (x + y));
    CHECK(oracle.gamma_iterate(x, s, y, 30) == Catch::Approx(limit).margin(1e-6));

    // residual updates contract after the second iteration
    const auto& res = oracle.residual_trace(x);
    REQUIRE(res.size() >= 3);
    for (std::size_t i = 2; i < res.size(); ++i) {
        if (res[i - 1] == 0.0) break;
        CHECK(res[i] / res[i - 1] < 1.0);
    }
}

TEST_CASE("delta line descriptors") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double x = 40.0, s = 3.0;
    const auto gd = ks.gamma_dirac(x, s);
    REQUIRE(gd.size() == 1);
    CHECK(gd[0].position == Catch::Approx(x - c.c1 * s).epsilon(1e-14));
    CHECK(gd[0].weight == Catch::Approx(-c.c5 / c.c6 * std::exp(-c.c2 * x)).epsilon(1e-14));

    // the reflected pulse sits at negative y here, so only the gain pulse shows
    CHECK(ks.eta_dirac(x, s).size() == 1);
    const double xe = 6.0; // here c1 s > x and the reflected pulse is inside
    const auto ed = ks.eta_dirac(xe, s);
    REQUIRE(ed.size() == 2);
    CHECK(ed[0].position == Catch::Approx(c.c4 / c.c1 * (c.c1 * s - xe)).epsilon(1e-12));
    CHECK(ed[0].weight == Catch::Approx(c.c5 * c.c7 / c.c6 * std::exp(-c.c2 * xe)).epsilon(1e-14));
    CHECK(ed[1].position == Catch::Approx(xe + c.c4 * s).epsilon(1e-14));
    CHECK(ed[1].weight == Catch::Approx(c.k / c.c6).epsilon(1e-14));

    // composed kernel: boundary delta appears once the reflection is active
    const double xr = kKernelL - 1.0;
    const auto gdirac = ks.g_dirac(xr, 3.0, 0.0);
    bool found_boundary = false;
    for (const auto& d : gdirac)
        if (d.position == kKernelL && d.weight == Catch::Approx(-c.c6 * c.k / c.c6))
            found_boundary = true;
    CHECK(found_boundary);
}

TEST_CASE("domain guards") {
    const KernelSet ks = make_kernels();
    CHECK_THROWS_AS(ks.gamma_smooth(-1.0, 1.0, 5.0), validation_error);
    CHECK_THROWS_AS(ks.gamma_smooth(5.0, 5.0, 5.0), validation_error); // s > D
    CHECK_THROWS_AS(ks.eta_smooth(5.0, 1.0, 2.0 * kKernelL), validation_error);
    LinearCoeffs bad = fig_coeffs();
    bad.D = 40.0; // (c1+c4)*40 > 100
    CHECK_THROWS_AS(KernelSet(bad, kKernelL), validation_error);
}
