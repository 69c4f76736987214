#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "arzctl/history.hpp"
#include "arzctl/kernels.hpp"
#include "arzctl/model.hpp"
#include "arzctl/transforms.hpp"

using namespace arzctl;

namespace {

constexpr double kL = 100.0;

KernelSet make_kernels() {
    ModelParams p;
    return KernelSet(coefficients(equilibrium(p), p, 0.1, 4.0), kL);
}

// bilinear sampler over nodal values: slices[j][i] at (i * dx, j * ds)
struct SliceSampler {
    const std::vector<std::vector<double>>* slices;
    double dx;
    double ds;
    double operator()(double x, double s) const {
        const auto& sl = *slices;
        const double pos = std::clamp(s / ds, 0.0, double(sl.size() - 1));
        std::size_t j = std::min(std::size_t(pos), sl.size() - 2);
        const double w = pos - double(j);
        const double a = sample_linear(sl[j], dx, x);
        const double b = sample_linear(sl[j + 1], dx, x);
        return (1.0 - w) * a + w * b;
    }
};

struct TestState {
    std::vector<double> z, v;
    std::function<double(double, double)> psi;
};

// smooth random-ish state respecting the inlet coupling z(0) = -c7 v(0)
TestState make_state(const LinearCoeffs& c, double dx, std::size_t nx, int seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-0.5, 0.5);
    std::uniform_real_distribution<double> phase(0.0, 6.28);
    const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
    TestState st;
    st.v.resize(nx);
    st.z.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = dx * double(i);
        st.v[i] = 0.6 + a1 * std::sin(2.0 * M_PI * x / kL + p1);
    }
    const double v0 = st.v[0];
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = dx * double(i);
        st.z[i] = -c.c7 * v0 * std::cos(3.0 * M_PI * x / kL) +
                  a2 * std::sin(std::sin(p2) + 4.0 * M_PI * x / kL) *
                      (1.0 - std::cos(2.0 * M_PI * x / kL));
    }
    st.psi = [a3, p3](double x, double s) {
        return a3 * std::sin(2.0 * M_PI * x / kL + 1.3 * s + p3) +
               0.2 * std::cos(0.7 * s) * std::exp(-std::pow((x - 40.0) / 25.0, 2));
    };
    return st;
}

} // namespace

TEST_CASE("zero state maps to zero both ways") {
    const KernelSet ks = make_kernels();
    const double dx = 1.0;
    std::vector<double> zero(101, 0.0);
    auto nil = [](double, double) { return 0.0; };
    for (double x : {0.0, 7.0, 50.0, 93.0, 100.0})
        for (double s : {0.0, 1.0, 2.5, 4.0}) {
            CHECK(forward_point(ks, nil, zero, zero, dx, x, s, 0.125, dx) == 0.0);
            CHECK(inverse_point(ks, nil, zero, zero, dx, x, s, 0.125, dx) == 0.0);
        }
}

TEST_CASE("clock-zero slice couples the states pointwise") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double dx = 1.0;
    const std::size_t nx = 101;
    const TestState st = make_state(c, dx, nx, 5);
    for (std::size_t i = 1; i + 1 < nx; i += 7) {
        const double x = dx * double(i);
        const double beta0 = forward_point(ks, st.psi, st.z, st.v, dx, x, 0.0, 0.125, dx);
        const double expect = st.psi(x, 0.0) +
                              c.c5 / c.c6 * std::exp(-c.c2 * x) * st.z[i] -
                              c.k / c.c6 * st.v[i];
        CHECK(beta0 == Catch::Approx(expect).margin(1e-12));
        // and the inverse restores the slice exactly at s = 0
        auto beta = [&](double xx, double ss) {
            return forward_point(ks, st.psi, st.z, st.v, dx, xx, ss, 0.125, dx);
        };
        CHECK(inverse_point(ks, beta, st.z, st.v, dx, x, 0.0, 0.125, dx) ==
              Catch::Approx(st.psi(x, 0.0)).margin(1e-12));
    }
}

TEST_CASE("forward transform is linear in all three states") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double dx = 1.0;
    const std::size_t nx = 101;
    const TestState a = make_state(c, dx, nx, 11);
    const TestState b = make_state(c, dx, nx, 12);
    const double la = 1.7, lb = -0.4;
    std::vector<double> zc(nx), vc(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        zc[i] = la * a.z[i] + lb * b.z[i];
        vc[i] = la * a.v[i] + lb * b.v[i];
    }
    auto psic = [&](double x, double s) { return la * a.psi(x, s) + lb * b.psi(x, s); };
    for (double x : {3.0, 12.0, 55.0, 90.0, 99.0})
        for (double s : {0.5, 2.0, 3.7}) {
            const double fa = forward_point(ks, a.psi, a.z, a.v, dx, x, s, 0.125, dx);
            const double fb = forward_point(ks, b.psi, b.z, b.v, dx, x, s, 0.125, dx);
            const double fc = forward_point(ks, psic, zc, vc, dx, x, s, 0.125, dx);
            CHECK(fc == Catch::Approx(la * fa + lb * fb).margin(1e-12));
        }
}

TEST_CASE("transport term of a constant input matches the closed form") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    auto one = [](double, double) { return 1.0; };
    // mid-road branch: the y-integral of the Volterra kernel telescopes
    for (double s : {0.8, 2.0, 3.9})
        for (double x : {30.0, 50.0, 70.0}) {
            REQUIRE(x > c.c1 * s);
            REQUIRE(x < kL - c.c4 * s);
            const double expect = std::exp(-c.c1 * c.c2 * s) +
                                  c.k / (c.c1 * c.c2) * (1.0 - std::exp(-c.c1 * c.c2 * s));
            CHECK(transform_transport_term(ks, one, x, s, 0.01, 0.25) ==
                  Catch::Approx(expect).epsilon(1e-6));
        }
}

TEST_CASE("forward transform is continuous across the branch seams") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double dx = 1.0;
    const std::size_t nx = 101;
    const double eps = 1e-7;
    for (int trial = 0; trial < 25; ++trial) {
        const TestState st = make_state(c, dx, nx, 100 + trial);
        const double s = 0.5 + 0.14 * double(trial);
        for (double seam : {c.c1 * s, kL - c.c4 * s}) {
            const double lo = forward_point(ks, st.psi, st.z, st.v, dx,
                                            seam - eps, s, 0.0625, dx);
            const double hi = forward_point(ks, st.psi, st.z, st.v, dx,
                                            seam + eps, s, 0.0625, dx);
            CHECK(lo == Catch::Approx(hi).margin(1e-6));
        }
    }
}

TEST_CASE("inverse transform is continuous across the branch seams") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const double dx = 1.0;
    const std::size_t nx = 101;
    const double eps = 1e-7;
    for (int trial = 0; trial < 10; ++trial) {
        const TestState st = make_state(c, dx, nx, 300 + trial);
        const double s = 0.6 + 0.3 * double(trial);
        auto beta = [&](double x, double ss) { return st.psi(x, 0.3 * ss + 0.1); };
        for (double seam : {c.c1 * s, kL - c.c4 * s}) {
            const double lo = inverse_point(ks, beta, st.z, st.v, dx,
                                            seam - eps, s, 0.0625, dx);
            const double hi = inverse_point(ks, beta, st.z, st.v, dx,
                                            seam + eps, s, 0.0625, dx);
            CHECK(lo == Catch::Approx(hi).margin(1e-6));
        }
    }
}

namespace {

// state arrays in `st` are sampled at unit spacing; dx only sets the beta
// grid and the quadrature step in y
double round_trip_error(const KernelSet& ks, const TestState& st, double dx,
                        double ds, double tau_step) {
    const double state_dx = 1.0;
    const std::size_t nx = std::size_t(std::round(kL / dx)) + 1;
    const double D = ks.coeffs().D;
    const std::size_t ns = std::size_t(std::round(D / ds)) + 1;
    std::vector<std::vector<double>> beta(ns, std::vector<double>(nx));
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            beta[j][i] = forward_point(ks, st.psi, st.z, st.v, state_dx,
                                       dx * double(i), ds * double(j), tau_step, dx);
    const SliceSampler bs{&beta, dx, ds};
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < ns; j += 2)
        for (std::size_t i = 0; i < nx; i += 4) {
            const double x = dx * double(i), s = ds * double(j);
            const double back = inverse_point(ks, bs, st.z, st.v, state_dx, x, s,
                                              tau_step, dx);
            const double truth = st.psi(x, s);
            num += (back - truth) * (back - truth);
            den += truth * truth + 1e-6;
        }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("inverse undoes the forward transform and converges with the grid") {
    const KernelSet ks = make_kernels();
    const auto& c = ks.coeffs();
    const TestState st = make_state(c, 1.0, 101, 77);
    const double coarse = round_trip_error(ks, st, 2.0, 0.5, 0.25);
    const double mid = round_trip_error(ks, st, 1.0, 0.25, 0.125);
    const double fine = round_trip_error(ks, st, 0.5, 0.125, 0.0625);
    INFO("coarse=" << coarse << " mid=" << mid << " fine=" << fine);
    CHECK(fine < 1e-3);
    CHECK(mid > 1.3 * fine);
    CHECK(coarse > 1.3 * mid);
}

TEST_CASE("input history sampling") {
    const std::size_t nx = 5;
    const double dx = 1.0, dt = 1.0, D = 3.0;
    ControlHistory h(nx, dx, dt, D);
    CHECK(h.slices() == 3);

    std::vector<std::vector<double>> pre(3, std::vector<double>(nx));
    for (std::size_t j = 0; j < 3; ++j) pre[j].assign(nx, 10.0 + double(j));
    h.set_prehistory(pre);

    h.push(std::vector<double>(nx, 100.0)); // command at t = 0
    h.push(std::vector<double>(nx, 101.0)); // command at t = 1
    // now t = 2; the value at clock s is the command from t + s - D = s - 1
    std::vector<double> cand(nx, 102.0);
    CHECK(h.sample(2.0, 3.0, cand) == 102.0);
    CHECK(h.sample(2.0, 2.0, cand) == 101.0);
    CHECK(h.sample(2.0, 1.0, cand) == 100.0);
    CHECK(h.sample(2.0, 0.0, cand) == 12.0);  // prehistory at xi = 2
    CHECK(h.applied(2.0) == 12.0);
    // fractional clock blends adjacent slices in time
    CHECK(h.sample(2.0, 1.5, cand) == Catch::Approx(100.5).epsilon(1e-14));
    CHECK(h.sample(2.0, 0.25, cand) == Catch::Approx(12.0 * 0.75 + 100.0 * 0.25).epsilon(1e-14));

    h.push(cand);
    h.push(std::vector<double>(nx, 103.0));
    // t = 4 > D: prehistory no longer reachable
    CHECK(h.sample(0.0, 0.0, {}) == 101.0);
    CHECK(h.sample(0.0, 3.0, std::vector<double>(nx, 104.0)) == 104.0);

    CHECK_THROWS_AS(h.sample(0.0, 3.5, cand), validation_error);
    CHECK_THROWS_AS(h.sample(0.0, 3.0, {}), validation_error);
    CHECK_THROWS_AS(h.push(std::vector<double>(2, 0.0)), validation_error);
    CHECK_THROWS_AS(ControlHistory(nx, dx, 0.4, 3.0), validation_error);

    // zero delay: the candidate is delivered immediately
    ControlHistory h0(nx, dx, 1.0, 0.0);
    CHECK(h0.slices() == 0);
    std::vector<double> ramp{0.0, 1.0, 2.0, 3.0, 4.0};
    CHECK(h0.sample(2.5, 0.0, ramp) == Catch::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("input history interpolates in space") {
    ControlHistory h(5, 2.0, 0.5, 1.0);
    std::vector<std::vector<double>> pre(2, std::vector<double>{0, 1, 2, 3, 4});
    h.set_prehistory(pre);
    CHECK(h.applied(3.0) == Catch::Approx(1.5).epsilon(1e-14));
    CHECK(h.applied(-1.0) == 0.0);   // clamped to the inlet
    CHECK(h.applied(100.0) == 4.0);  // clamped to the outlet
}
