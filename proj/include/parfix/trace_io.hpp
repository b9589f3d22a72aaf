#pragma once

// Trace and summary writers. Floats are printed with 17 significant digits
// so files round-trip exactly and diff cleanly between runs.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

#include "parfix/schemes.hpp"

namespace parfix {

inline constexpr const char* trace_header =
    "n,alpha,selected_index,selected_displacement,residual,dist_to_oracle";

inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One header row, then one row per traced iteration. Absent values are empty
/// fields; selected_index is 1-based.
inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    out << trace_header << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    for (const auto& r : trace.rows) {
        out << r.n << ',' << opt(r.alpha) << ',' << (r.selected_index + 1) << ','
            << format_real(r.selected_displacement) << ',' << format_real(r.residual) << ','
            << opt(r.dist_to_oracle) << '\n';
    }
}

inline nlohmann::json summary_json(const RunResult& r) {
    nlohmann::json j;
    j["converged"] = r.converged;
    j["stop_reason"] = to_string(r.stop_reason);
    j["iterations"] = r.iterations_used;
    j["final_residual"] = r.final_residual;
    j["final_iterate"] = r.final_iterate.values();
    for (const auto& [k, v] : r.trace.metadata) j["metadata"][k] = v;
    return j;
}

} // namespace parfix
