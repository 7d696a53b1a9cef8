#pragma once

#include <string>
#include <vector>

#include "spinrb/analysis.hpp"
#include "spinrb/io.hpp"
#include "spinrb/presets.hpp"
#include "spinrb/rb.hpp"

namespace spinrb {

struct SweepRow {
    SweepPoint point;
    bool ok = false;
    FitResult fit;       // valid when ok
    std::string error;   // failure tag when !ok
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Runs one full benchmarking experiment plus a combined fit per sweep
// point.  Every point uses the same seed as a standalone run would, so a
// single-point sweep reproduces `rb run` + `rb fit` exactly.  Failed fits
// are recorded in their row rather than dropped.
inline SweepResult run_sweep(const CliffordGroup& group, const ExperimentConfig& cfg) {
    if (cfg.sweep.empty()) throw ConfigError("sweep config has no sweep points");
    SweepResult result;
    for (const SweepPoint& point : cfg.sweep) {
        SweepRow row;
        row.point = point;
        RbConfig rb = cfg.rb;
        rb.pulse_shape = point.shape;
        rb.pi_pulse_duration = point.pi_pulse_duration;
        try {
            const RbDataset ds = run_experiment(group, rb);
            row.fit = fit_decay(aggregate(ds, FitModeSpec::combined_half()),
                                FitModeSpec::combined_half());
            row.ok = true;
        } catch (const FitError& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

inline std::string sweep_csv(const SweepResult& result) {
    std::string out = "pi_pulse_duration,pulse_shape,f_c,f_c_ci_lo,f_c_ci_hi,error\n";
    for (const SweepRow& row : result.rows) {
        out += format_double(row.point.pi_pulse_duration) + "," + shape_label(row.point.shape) +
               ",";
        if (row.ok) {
            out += format_double(row.fit.f_c) + "," +
                   format_double(row.fit.f_c - row.fit.f_c_ci_half) + "," +
                   format_double(row.fit.f_c + row.fit.f_c_ci_half) + ",";
        } else {
            out += ",,,";
            for (char c : row.error) out += (c == ',' || c == '\n') ? ' ' : c;
        }
        out += "\n";
    }
    return out;
}

inline json sweep_json(const SweepResult& result) {
    json rows = json::array();
    for (const SweepRow& row : result.rows) {
        json j;
        j["pi_pulse_duration"] = row.point.pi_pulse_duration;
        j["pulse_shape"] = shape_label(row.point.shape);
        if (row.ok) {
            j["f_c"] = row.fit.f_c;
            j["f_c_ci_95"] = json::array(
                {row.fit.f_c - row.fit.f_c_ci_half, row.fit.f_c + row.fit.f_c_ci_half});
            j["p"] = row.fit.p.value;
        } else {
            j["error"] = row.error;
        }
        rows.push_back(j);
    }
    return json{{"points", rows}};
}

}  // namespace spinrb
