#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "arzctl/config.hpp"
#include "arzctl/csv_io.hpp"
#include "arzctl/simulator.hpp"

namespace arzctl {

inline constexpr const char* kVersion = "arzctl 1.0.0";

struct RunManifest {
    std::string digest;
    std::string scenario;
    std::string version = kVersion;
    std::chrono::system_clock::time_point started, finished;
    std::vector<std::string> output_files;
    std::string error; // empty on success
    double axis_value = 0.0;
};

/// Point one numeric config knob at a new value. The accepted names are the
/// numeric keys of the config file sections.
inline void apply_axis(ModelParams& model, SimConfig& sim,
                       const std::string& axis, double value) {
    if (axis == "D_actual") sim.D_actual = value;
    else if (axis == "D_ctrl") sim.D_ctrl = value;
    else if (axis == "k") sim.k = value;
    else if (axis == "dt") sim.dt = value;
    else if (axis == "dx") sim.dx = value;
    else if (axis == "T_final") sim.T_final = value;
    else if (axis == "ic_amplitude") sim.ic.amplitude = value;
    else if (axis == "ic_cycles") sim.ic.cycles = value;
    else if (axis == "alpha") model.alpha = value;
    else if (axis == "q_in") model.q_in = value;
    else if (axis == "tau_acc") model.tau_acc = value;
    else if (axis == "tau_m") model.tau_m = value;
    else if (axis == "h_acc_bar") model.h_acc_bar = value;
    else
        throw validation_error("sweep: unknown axis '" + axis + "'");
}

/// Run one scenario per axis value, up to `parallelism` at a time, each
/// writing its own CSV pair under `out_dir`; failures are recorded in the
/// manifest and the sweep continues. A summary CSV with final norms, the
/// performance integrals and the feedback coefficient c6 is written last.
inline std::vector<RunManifest> sweep(const ModelParams& base_model,
                                      const SimConfig& base_sim,
                                      const std::string& axis,
                                      const std::vector<double>& values,
                                      unsigned parallelism,
                                      const std::string& out_dir) {
    if (parallelism == 0) parallelism = 1;
    std::vector<RunManifest> manifests(values.size());
    struct Row {
        bool ok = false;
        double value = 0.0, l2_rho = 0.0, l2_v = 0.0;
        Metrics m;
        double c6 = 0.0;
    };
    std::vector<Row> rows(values.size());

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= values.size()) return;
            RunManifest& mf = manifests[i];
            mf.axis_value = values[i];
            mf.started = std::chrono::system_clock::now();
            Row& row = rows[i];
            row.value = values[i];
            try {
                ModelParams model = base_model;
                SimConfig sim = base_sim;
                apply_axis(model, sim, axis, values[i]);
                mf.scenario = scenario_to_string(sim.scenario);
                const LinearCoeffs co =
                    coefficients(equilibrium(model), model, sim.k, sim.D_ctrl);
                row.c6 = co.c6;
                const SimResult res = run_scenario(sim, model);
                row.l2_rho = res.l2_rho.back();
                row.l2_v = res.l2_v.back();
                row.m = metrics(res, res.times.back());
                row.ok = true;
                const std::string stem = out_dir + "/run_" + axis + "_" +
                                         std::to_string(i);
                write_snapshot_csv(res, stem + "_snapshots.csv");
                write_norms_csv(res, stem + "_norms.csv");
                mf.output_files = {stem + "_snapshots.csv",
                                   stem + "_norms.csv"};
            } catch (const std::exception& e) {
                mf.error = e.what();
            }
            mf.finished = std::chrono::system_clock::now();
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_threads =
        std::min<std::size_t>(parallelism, std::max<std::size_t>(values.size(), 1));
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // single serialized sink for the cross-run table
    const std::string summary_path = out_dir + "/sweep_" + axis + "_summary.csv";
    std::ofstream out(summary_path);
    if (!out) throw io_error("sweep: cannot open '" + summary_path + "'");
    out << axis << ",status,c6,final_l2_rho,final_l2_v,j_ttt,j_fuel,j_comfort\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        out << detail::csv_number(r.value) << ','
            << (r.ok ? "ok" : "failed") << ','
            << detail::csv_number(r.c6) << ','
            << detail::csv_number(r.l2_rho) << ','
            << detail::csv_number(r.l2_v) << ','
            << detail::csv_number(r.m.j_ttt) << ','
            << detail::csv_number(r.m.j_fuel) << ','
            << detail::csv_number(r.m.j_comfort) << '\n';
    }
    if (!out) throw io_error("sweep: write failure on '" + summary_path + "'");
    for (auto& mf : manifests)
        if (mf.error.empty()) mf.output_files.push_back(summary_path);
    return manifests;
}

} // namespace arzctl
