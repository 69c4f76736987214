// Command-line front end: scenario runs, parameter sweeps and the two
// self-check commands for the kernel closed forms and the state transform.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arzctl/config.hpp"
#include "arzctl/csv_io.hpp"
#include "arzctl/kernel_oracle.hpp"
#include "arzctl/simulator.hpp"
#include "arzctl/sweep.hpp"
#include "arzctl/transforms.hpp"

namespace {

using namespace arzctl;

std::string resolve_out_dir(const std::string& flag, const LoadedConfig& cfg) {
    if (!flag.empty()) return flag;
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("ARZCTL_OUT_DIR")) return env;
    return ".";
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
    const LoadedConfig cfg = load_config(config_path);
    const std::string dir = resolve_out_dir(out_flag, cfg);
    std::filesystem::create_directories(dir);
    const SimResult res = run_scenario(cfg.sim, cfg.model);
    const std::string stem = dir + "/run_" + cfg.digest;
    write_snapshot_csv(res, stem + "_snapshots.csv");
    write_norms_csv(res, stem + "_norms.csv");
    const Metrics m = metrics(res, res.times.back());
    std::printf("scenario %s, %zu steps\n",
                scenario_to_string(cfg.sim.scenario).c_str(), res.steps);
    std::printf("final norms: l2_rho %.6g, l2_v %.6g\n", res.l2_rho.back(),
                res.l2_v.back());
    std::printf("metrics over [0, %g]: ttt %.6g, fuel %.6g, comfort %.6g\n",
                res.times.back(), m.j_ttt, m.j_fuel, m.j_comfort);
    std::printf("outputs: %s_snapshots.csv, %s_norms.csv\n", stem.c_str(),
                stem.c_str());
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag,
              const std::string& axis, const std::string& values_csv,
              unsigned parallelism) {
    const LoadedConfig cfg = load_config(config_path);
    const std::string dir = resolve_out_dir(out_flag, cfg);
    std::filesystem::create_directories(dir);
    std::vector<double> values;
    std::size_t start = 0;
    while (start < values_csv.size()) {
        const std::size_t comma = values_csv.find(',', start);
        const std::string tok = values_csv.substr(
            start, comma == std::string::npos ? comma : comma - start);
        if (!tok.empty()) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw validation_error("sweep: non-numeric value '" + tok + "'");
            values.push_back(v);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    const auto manifests =
        sweep(cfg.model, cfg.sim, axis, values, parallelism, dir);
    int failed = 0;
    for (const auto& mf : manifests) {
        if (mf.error.empty()) {
            std::printf("%s=%g: ok\n", axis.c_str(), mf.axis_value);
        } else {
            std::printf("%s=%g: FAILED (%s)\n", axis.c_str(), mf.axis_value,
                        mf.error.c_str());
            ++failed;
        }
    }
    std::printf("summary: %s/sweep_%s_summary.csv\n", dir.c_str(), axis.c_str());
    return failed == 0 ? 0 : 1;
}

int cmd_verify_kernels(const std::string& config_path) {
    const LoadedConfig cfg = load_config(config_path);
    const LinearCoeffs co = coefficients(equilibrium(cfg.model), cfg.model,
                                         cfg.sim.k, cfg.sim.D_ctrl);
    const KernelSet ks(co, cfg.model.L);
    const KernelOracle oracle(co, cfg.model.L);
    // the kernels are supported near the domain edges on long roads, so the
    // abscissae mix the delay length scale with the road length scale
    const double span = (co.c1 + co.c4) * co.D;
    std::vector<double> xs, ys;
    for (int i = 0; i <= 5; ++i) {
        xs.push_back(span * i / 5.0);
        xs.push_back(cfg.model.L * i / 5.0);
        ys.push_back(span * (i + 0.3) / 5.0);
        ys.push_back(cfg.model.L - span * (i + 0.3) / 5.0);
        ys.push_back(cfg.model.L * (i + 0.3) / 6.0);
    }
    double worst = 0.0;
    int checked = 0, nonzero = 0;
    for (double x : xs)
        for (int is = 1; is <= 8; ++is)
            for (double y : ys) {
                const double s = co.D * is / 8.0;
                if (x < 0.0 || x > cfg.model.L || y < 0.0 || y > cfg.model.L)
                    continue;
                const double g = ks.gamma_smooth(x, s, y);
                const double e = ks.eta_smooth(x, s, y);
                worst = std::max(worst, std::abs(g - oracle.gamma(x, s, y)));
                worst = std::max(worst, std::abs(e - oracle.eta(x, s, y)));
                if (g != 0.0 || e != 0.0) ++nonzero;
                ++checked;
            }
    std::printf("kernel check: %d points (%d on the kernel support), "
                "worst deviation %.3g\n", checked, nonzero, worst);
    if (worst >= 1e-6) {
        std::printf("kernel check FAILED (threshold 1e-6)\n");
        return 1;
    }
    std::printf("kernel check passed\n");
    return 0;
}

int cmd_verify_transform(const std::string& config_path) {
    const LoadedConfig cfg = load_config(config_path);
    const double L = cfg.model.L;
    const LinearCoeffs co = coefficients(equilibrium(cfg.model), cfg.model,
                                         cfg.sim.k, cfg.sim.D_ctrl);
    const KernelSet ks(co, L);
    // the transform varies on the delay length scale c1 D, so the working
    // grid must resolve that scale regardless of the road length
    const double dx_target = std::min(L / 200.0, co.c1 * co.D / 24.0);
    const std::size_t cells = static_cast<std::size_t>(std::ceil(L / dx_target));
    const std::size_t nx = cells + 1;
    const double dx = L / double(cells);
    std::vector<double> z(nx), v(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = dx * double(i);
        v[i] = 0.4 * std::sin(2.0 * M_PI * x / L + 0.3);
        z[i] = -co.c7 * v[0] * std::cos(2.0 * M_PI * x / L) +
               0.25 * std::sin(4.0 * M_PI * x / L);
    }
    auto psi = [&](double y, double s) {
        return 0.3 * std::cos(2.0 * M_PI * y / L) * std::sin(0.7 * s);
    };
    const double ds = co.D / 32.0;
    const std::size_t ns = 33;
    std::vector<std::vector<double>> beta(ns, std::vector<double>(nx));
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            beta[j][i] = forward_point(ks, psi, z, v, dx, dx * double(i),
                                       ds * double(j), ds, dx);
    auto bsamp = [&](double x, double s) {
        const double js = s / ds;
        std::size_t j = std::min<std::size_t>(std::size_t(js), ns - 2);
        const double w = js - double(j);
        return (1.0 - w) * sample_linear(beta[j], dx, x) +
               w * sample_linear(beta[j + 1], dx, x);
    };
    const std::size_t xstride = std::max<std::size_t>(1, nx / 50);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < ns; j += 2)
        for (std::size_t i = 0; i < nx; i += xstride) {
            const double x = dx * double(i), s = ds * double(j);
            const double back = inverse_point(ks, bsamp, z, v, dx, x, s, ds, dx);
            const double truth = psi(x, s);
            num += (back - truth) * (back - truth);
            den += truth * truth;
        }
    const double rel = std::sqrt(num / den);
    std::printf("transform round trip: relative error %.3g\n", rel);
    if (rel >= 1e-3) {
        std::printf("transform check FAILED (threshold 1e-3)\n");
        return 1;
    }
    std::printf("transform check passed\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-traffic delay-compensated control simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, values_csv;
    unsigned parallelism = 1;

    auto* run = app.add_subcommand("run", "simulate one scenario");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory");

    auto* sw = app.add_subcommand("sweep", "run a scenario per axis value");
    sw->add_option("--config", config_path, "config file")->required();
    sw->add_option("--axis", axis, "numeric config key to vary")->required();
    sw->add_option("--values", values_csv, "comma-separated values")->required();
    sw->add_option("--parallelism", parallelism, "concurrent runs");
    sw->add_option("--out", out_dir, "output directory");

    auto* vk = app.add_subcommand("verify-kernels",
                                  "closed forms vs iterative kernel solver");
    vk->add_option("--config", config_path, "config file")->required();

    auto* vt = app.add_subcommand("verify-transform",
                                  "forward/inverse transform round trip");
    vt->add_option("--config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (sw->parsed())
            return cmd_sweep(config_path, out_dir, axis, values_csv, parallelism);
        if (vk->parsed()) return cmd_verify_kernels(config_path);
        if (vt->parsed()) return cmd_verify_transform(config_path);
    } catch (const arzctl::validation_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const arzctl::divergence_error& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return 2;
    } catch (const arzctl::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
