#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "arzctl/errors.hpp"
#include "arzctl/simulator.hpp"

namespace arzctl {

namespace detail {

/// Shortest representation that survives a parse round trip (17 significant
/// digits covers every double).
inline std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

/// Field snapshots in plotting units, one row per (t, x), time-major.
inline void write_snapshot_csv(const SimResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("csv: cannot open '" + path + "' for writing");
    out << "t,x,rho_veh_per_km,v_km_per_h,h_acc_s\n";
    for (std::size_t s = 0; s < res.snapshot_times.size(); ++s) {
        const TrafficField& f = res.snapshots[s];
        const std::vector<double>& h = res.snapshot_hacc[s];
        for (std::size_t i = 0; i < f.rho.size(); ++i) {
            out << detail::csv_number(res.snapshot_times[s]) << ','
                << detail::csv_number(res.dx * static_cast<double>(i)) << ','
                << detail::csv_number(f.rho[i] * 1000.0) << ','
                << detail::csv_number(f.v[i] * 3.6) << ','
                << detail::csv_number(h[i]) << '\n';
        }
    }
    if (!out) throw io_error("csv: write failure on '" + path + "'");
}

/// Norm traces (SI) plus the energy monitors. The V0 column stores the
/// natural logarithm of the graded functional, whose raw value overflows a
/// double for kilometre roads; V1/V2 are plain values. Monitor columns are
/// empty on rows without a stored monitor sample.
inline void write_norms_csv(const SimResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("csv: cannot open '" + path + "' for writing");
    out << "t,l2_rho,l2_v,l2_hacc,V0,V1,V2\n";
    std::size_t m = 0;
    for (std::size_t n = 0; n < res.times.size(); ++n) {
        out << detail::csv_number(res.times[n]) << ','
            << detail::csv_number(res.l2_rho[n]) << ','
            << detail::csv_number(res.l2_v[n]) << ','
            << detail::csv_number(res.l2_hacc[n]);
        if (m < res.monitor_times.size() &&
            std::abs(res.monitor_times[m] - res.times[n]) <= 1e-9) {
            out << ',' << detail::csv_number(res.log_v0[m]) << ','
                << detail::csv_number(res.v1[m]) << ','
                << detail::csv_number(res.v2[m]);
            ++m;
        } else {
            out << ",,,";
        }
        out << '\n';
    }
    if (!out) throw io_error("csv: write failure on '" + path + "'");
}

/// Parsed CSV: header names plus rows of optional numbers (NaN marks an
/// empty cell). Used by tests and by downstream plotting scripts.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("csv: cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        throw io_error("csv: '" + path + "' is empty");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');)
        t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(
                start, comma == std::string::npos ? comma : comma - start);
            row.push_back(cell.empty()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : std::strtod(cell.c_str(), nullptr));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() != t.header.size())
            throw io_error("csv: ragged row in '" + path + "'");
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace arzctl
