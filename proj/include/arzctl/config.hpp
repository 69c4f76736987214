#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "arzctl/errors.hpp"
#include "arzctl/model.hpp"
#include "arzctl/simulator.hpp"

namespace arzctl {

/// Multiplier taking a value in `unit` to the SI base used internally
/// (m, s, veh/m, veh/s, m/s).
inline double unit_factor(std::string_view unit) {
    if (unit == "m" || unit == "s" || unit == "veh/m" || unit == "veh/s" ||
        unit == "m/s" || unit == "1" || unit == "")
        return 1.0;
    if (unit == "km") return 1000.0;
    if (unit == "min") return 60.0;
    if (unit == "h") return 3600.0;
    if (unit == "km/h") return 1.0 / 3.6;
    if (unit == "veh/h") return 1.0 / 3600.0;
    if (unit == "veh/km") return 1.0 / 1000.0;
    throw validation_error("config: unknown unit '" + std::string(unit) + "'");
}

inline double unit_to_si(double value, std::string_view unit) {
    return value * unit_factor(unit);
}

inline double si_to_unit(double value, std::string_view unit) {
    return value / unit_factor(unit);
}

namespace detail {

/// A config value is either a bare number (already SI) or "number unit".
inline double numeric_value(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        std::istringstream in(v.get<std::string>());
        double x = 0.0;
        std::string unit;
        if (!(in >> x))
            throw validation_error("config: key '" + key +
                                   "' is not numeric");
        in >> unit;
        return unit_to_si(x, unit);
    }
    throw validation_error("config: key '" + key + "' must be a number or a "
                           "'value unit' string");
}

inline void reject_unknown(const nlohmann::json& section,
                           const std::string& name,
                           std::initializer_list<std::string_view> known) {
    for (const auto& item : section.items()) {
        bool ok = false;
        for (auto k : known)
            if (item.key() == k) { ok = true; break; }
        if (!ok)
            throw validation_error("config: unknown key '" + item.key() +
                                   "' in section '" + name + "'");
    }
}

} // namespace detail

struct LoadedConfig {
    ModelParams model;
    SimConfig sim;
    std::string out_dir;  // empty: caller decides
    std::string digest;   // deterministic over the effective parameters
};

inline ScenarioKind scenario_from_string(const std::string& s) {
    if (s == "closed_loop") return ScenarioKind::closed_loop;
    if (s == "uncompensated") return ScenarioKind::uncompensated;
    if (s == "open_loop") return ScenarioKind::open_loop;
    throw validation_error("config: unknown scenario '" + s + "'");
}

inline std::string scenario_to_string(ScenarioKind s) {
    switch (s) {
    case ScenarioKind::closed_loop: return "closed_loop";
    case ScenarioKind::uncompensated: return "uncompensated";
    case ScenarioKind::open_loop: return "open_loop";
    }
    return "?";
}

/// Parse a JSON config with sections model / control / simulation / output.
/// Missing keys keep the shipped defaults; unknown keys or sections are
/// rejected; everything is validated before return.
inline LoadedConfig parse_config(const nlohmann::json& root) {
    if (!root.is_object())
        throw validation_error("config: top level must be an object");
    detail::reject_unknown(root, "(top level)",
                           {"model", "control", "simulation", "output"});
    LoadedConfig out;

    if (root.contains("model")) {
        const auto& m = root.at("model");
        detail::reject_unknown(m, "model",
                               {"L", "l", "q_in", "tau_acc", "tau_m", "h_m",
                                "h_acc_bar", "alpha", "h_min", "h_max",
                                "rho_min", "v_f"});
        auto get = [&](const char* key, double& dst) {
            if (m.contains(key)) dst = detail::numeric_value(m.at(key), key);
        };
        get("L", out.model.L);
        get("l", out.model.l);
        get("q_in", out.model.q_in);
        get("tau_acc", out.model.tau_acc);
        get("tau_m", out.model.tau_m);
        get("h_m", out.model.h_m);
        get("h_acc_bar", out.model.h_acc_bar);
        get("alpha", out.model.alpha);
        get("h_min", out.model.h_min);
        get("h_max", out.model.h_max);
        get("rho_min", out.model.rho_min);
        if (m.contains("v_f"))
            out.model.v_f = detail::numeric_value(m.at("v_f"), "v_f");
    }

    if (root.contains("control")) {
        const auto& c = root.at("control");
        detail::reject_unknown(c, "control",
                               {"D_actual", "D_ctrl", "k", "scenario"});
        if (c.contains("D_actual"))
            out.sim.D_actual = detail::numeric_value(c.at("D_actual"), "D_actual");
        if (c.contains("D_ctrl"))
            out.sim.D_ctrl = detail::numeric_value(c.at("D_ctrl"), "D_ctrl");
        if (c.contains("k"))
            out.sim.k = detail::numeric_value(c.at("k"), "k");
        if (c.contains("scenario")) {
            if (!c.at("scenario").is_string())
                throw validation_error("config: scenario must be a string");
            out.sim.scenario =
                scenario_from_string(c.at("scenario").get<std::string>());
        }
    }

    if (root.contains("simulation")) {
        const auto& s = root.at("simulation");
        detail::reject_unknown(s, "simulation",
                               {"dt", "dx", "T_final", "snapshot_every",
                                "monitor_every", "ic_amplitude", "ic_cycles",
                                "beta_noise_floor"});
        auto get = [&](const char* key, double& dst) {
            if (s.contains(key)) dst = detail::numeric_value(s.at(key), key);
        };
        get("dt", out.sim.dt);
        get("dx", out.sim.dx);
        get("T_final", out.sim.T_final);
        get("snapshot_every", out.sim.snapshot_every);
        get("monitor_every", out.sim.monitor_every);
        get("ic_amplitude", out.sim.ic.amplitude);
        get("ic_cycles", out.sim.ic.cycles);
        get("beta_noise_floor", out.sim.beta_noise_floor);
    }

    if (root.contains("output")) {
        const auto& o = root.at("output");
        detail::reject_unknown(o, "output", {"dir"});
        if (o.contains("dir")) {
            if (!o.at("dir").is_string())
                throw validation_error("config: output.dir must be a string");
            out.out_dir = o.at("dir").get<std::string>();
        }
    }

    out.model.validate();
    out.sim.validate(out.model);

    // FNV-1a over the canonical serialization of the effective parameters
    {
        nlohmann::json eff;
        eff["model"] = {{"L", out.model.L}, {"l", out.model.l},
                        {"q_in", out.model.q_in}, {"tau_acc", out.model.tau_acc},
                        {"tau_m", out.model.tau_m}, {"h_m", out.model.h_m},
                        {"h_acc_bar", out.model.h_acc_bar},
                        {"alpha", out.model.alpha}, {"h_min", out.model.h_min},
                        {"h_max", out.model.h_max}, {"rho_min", out.model.rho_min}};
        eff["control"] = {{"D_actual", out.sim.D_actual},
                          {"D_ctrl", out.sim.D_ctrl}, {"k", out.sim.k},
                          {"scenario", scenario_to_string(out.sim.scenario)}};
        eff["simulation"] = {{"dt", out.sim.dt}, {"dx", out.sim.dx},
                             {"T_final", out.sim.T_final},
                             {"ic_amplitude", out.sim.ic.amplitude},
                             {"ic_cycles", out.sim.ic.cycles}};
        const std::string s = eff.dump();
        std::uint64_t h = 14695981039346656037ull;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(h));
        out.digest = buf;
    }
    return out;
}

inline LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("config: cannot open '" + path + "'");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // e.what() carries the position of the offending token
        throw validation_error("config: parse failure in '" + path +
                               "': " + e.what());
    }
    return parse_config(root);
}

} // namespace arzctl
