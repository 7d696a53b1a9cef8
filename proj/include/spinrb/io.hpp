#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinrb/analysis.hpp"
#include "spinrb/errors.hpp"
#include "spinrb/rb.hpp"

// File formats.  CSV uses a header row, '.' decimals, LF line endings;
// JSON uses a fixed key order.  Both are byte-stable for identical
// inputs, which the golden-file tests rely on.

namespace spinrb {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

inline std::string target_label(Target t) { return t == Target::Up ? "up" : "down"; }

inline Target parse_target(const std::string& s) {
    if (s == "up") return Target::Up;
    if (s == "down") return Target::Down;
    throw ConfigError("unknown target label '" + s + "'");
}

inline std::string shape_label(PulseShape s) {
    return s == PulseShape::Square ? "square" : "sinc3";
}

inline PulseShape parse_shape(const std::string& s) {
    if (s == "square") return PulseShape::Square;
    if (s == "sinc3") return PulseShape::Sinc3;
    throw ConfigError("unknown pulse shape '" + s + "' (expected square or sinc3)");
}

inline std::string policy_label(TargetPolicy p) {
    return p == TargetPolicy::RandomPerSequence ? "random_per_sequence" : "always_down";
}

inline TargetPolicy parse_policy(const std::string& s) {
    if (s == "random_per_sequence") return TargetPolicy::RandomPerSequence;
    if (s == "always_down") return TargetPolicy::AlwaysDown;
    throw ConfigError("unknown target_policy '" + s + "'");
}

namespace detail {

// Pulls known keys out of a JSON object and rejects anything left over,
// reporting the offending field path.
class JsonReader {
public:
    JsonReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj.is_object()) throw ConfigError(path_ + ": expected a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + key + ": wrong type");
        }
        seen_.push_back(key);
    }

    std::optional<json> take_object(const char* key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return std::nullopt;
        seen_.push_back(key);
        return *it;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            bool known = false;
            for (const std::string& s : seen_) {
                if (s == it.key()) {
                    known = true;
                    break;
                }
            }
            if (!known) throw ConfigError("unknown config key '" + path_ + it.key() + "'");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string> seen_;
};

}  // namespace detail

inline json noise_to_json(const NoiseModel& n) {
    return json{{"detuning_sigma", n.detuning_sigma},
                {"amplitude_error_sigma", n.amplitude_error_sigma},
                {"time_quantum", n.time_quantum},
                {"depolarizing_per_clifford", n.depolarizing_per_clifford},
                {"t2_star", n.t2_star},
                {"inter_gate_gap", n.inter_gate_gap}};
}

inline NoiseModel noise_from_json(const json& j, const std::string& path) {
    detail::JsonReader r(j, path);
    NoiseModel n;
    r.get("detuning_sigma", n.detuning_sigma);
    r.get("amplitude_error_sigma", n.amplitude_error_sigma);
    r.get("time_quantum", n.time_quantum);
    r.get("depolarizing_per_clifford", n.depolarizing_per_clifford);
    r.get("t2_star", n.t2_star);
    r.get("inter_gate_gap", n.inter_gate_gap);
    r.finish();
    return n;
}

inline json spam_to_json(const SpamModel& s) {
    return json{{"init_error", s.init_error},
                {"readout_fidelity_up", s.readout_fidelity_up},
                {"readout_fidelity_down", s.readout_fidelity_down}};
}

inline SpamModel spam_from_json(const json& j, const std::string& path) {
    detail::JsonReader r(j, path);
    SpamModel s;
    r.get("init_error", s.init_error);
    r.get("readout_fidelity_up", s.readout_fidelity_up);
    r.get("readout_fidelity_down", s.readout_fidelity_down);
    r.finish();
    return s;
}

inline json rb_config_to_json(const RbConfig& cfg) {
    json j;
    j["lengths"] = cfg.lengths;
    j["sequences_per_length"] = cfg.sequences_per_length;
    j["shots_per_sequence"] = cfg.shots_per_sequence;
    j["target_policy"] = policy_label(cfg.target_policy);
    j["interleaved_gate"] =
        cfg.interleaved_gate ? json(gate_label(*cfg.interleaved_gate)) : json(nullptr);
    j["interleaved_extra_depolarizing"] = cfg.interleaved_extra_depolarizing;
    j["seed"] = cfg.seed;
    j["pulse_shape"] = shape_label(cfg.pulse_shape);
    j["pi_pulse_duration"] = cfg.pi_pulse_duration;
    j["noise"] = noise_to_json(cfg.noise);
    j["spam"] = spam_to_json(cfg.spam);
    j["max_total_shots"] = cfg.max_total_shots;
    j["threads"] = cfg.threads;
    return j;
}

inline RbConfig rb_config_from_json(const json& j, const std::string& path = "") {
    detail::JsonReader r(j, path);
    RbConfig cfg;
    r.get("lengths", cfg.lengths);
    r.get("sequences_per_length", cfg.sequences_per_length);
    r.get("shots_per_sequence", cfg.shots_per_sequence);
    std::string policy = policy_label(cfg.target_policy);
    r.get("target_policy", policy);
    cfg.target_policy = parse_policy(policy);
    if (auto g = r.take_object("interleaved_gate")) {
        if (g->is_null()) {
            cfg.interleaved_gate.reset();
        } else if (g->is_string()) {
            cfg.interleaved_gate = parse_gate(g->get<std::string>());
        } else {
            throw ConfigError(path + "interleaved_gate: expected a gate label or null");
        }
    }
    r.get("interleaved_extra_depolarizing", cfg.interleaved_extra_depolarizing);
    r.get("seed", cfg.seed);
    std::string shape = shape_label(cfg.pulse_shape);
    r.get("pulse_shape", shape);
    cfg.pulse_shape = parse_shape(shape);
    r.get("pi_pulse_duration", cfg.pi_pulse_duration);
    if (auto n = r.take_object("noise")) cfg.noise = noise_from_json(*n, path + "noise.");
    if (auto s = r.take_object("spam")) cfg.spam = spam_from_json(*s, path + "spam.");
    r.get("max_total_shots", cfg.max_total_shots);
    r.get("threads", cfg.threads);
    r.finish();
    return cfg;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw ConfigError("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Dataset CSV: one row per shot, plus a JSON sidecar (same stem, .json)
// echoing the configuration and seed.
inline std::string dataset_to_csv(const RbDataset& ds) {
    std::string out = "n,k,target,shot_index,outcome\n";
    for (const RbRecord& rec : ds.records) {
        const std::string prefix =
            std::to_string(rec.n) + "," + std::to_string(rec.k) + "," + target_label(rec.target);
        for (std::size_t i = 0; i < rec.outcomes.size(); ++i) {
            out += prefix;
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += rec.outcomes[i] ? '1' : '0';
            out += '\n';
        }
    }
    return out;
}

inline json dataset_sidecar(const RbDataset& ds) {
    json j;
    j["config"] = rb_config_to_json(ds.config);
    j["seed"] = ds.config.seed;
    j["timestamp"] = ds.timestamp;
    return j;
}

inline void write_dataset(const RbDataset& ds, const std::filesystem::path& csv_path) {
    write_text_file(csv_path, dataset_to_csv(ds));
    std::filesystem::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    write_text_file(sidecar, dataset_sidecar(ds).dump(2) + "\n");
}

inline RbDataset read_dataset(const std::filesystem::path& csv_path) {
    std::filesystem::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    json meta;
    try {
        meta = json::parse(read_text_file(sidecar));
    } catch (const json::exception& e) {
        throw ConfigError("bad dataset sidecar " + sidecar.string() + ": " + e.what());
    }
    RbDataset ds;
    if (!meta.contains("config")) throw ConfigError("dataset sidecar lacks a config echo");
    ds.config = rb_config_from_json(meta["config"], "config.");
    if (meta.contains("timestamp") && meta["timestamp"].is_string()) {
        ds.timestamp = meta["timestamp"].get<std::string>();
    }

    std::istringstream in(read_text_file(csv_path));
    std::string line;
    if (!std::getline(in, line) || line != "n,k,target,shot_index,outcome") {
        throw ConfigError("bad dataset CSV header in " + csv_path.string());
    }
    RbRecord* current = nullptr;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string n_s, k_s, target_s, shot_s, outcome_s;
        if (!std::getline(row, n_s, ',') || !std::getline(row, k_s, ',') ||
            !std::getline(row, target_s, ',') || !std::getline(row, shot_s, ',') ||
            !std::getline(row, outcome_s)) {
            throw ConfigError(csv_path.string() + ":" + std::to_string(line_no) +
                              ": malformed row");
        }
        const int n = std::stoi(n_s);
        const int k = std::stoi(k_s);
        const Target target = parse_target(target_s);
        if (!current || current->n != n || current->k != k) {
            ds.records.emplace_back();
            current = &ds.records.back();
            current->n = n;
            current->k = k;
            current->target = target;
        }
        current->outcomes.push_back(outcome_s == "1" ? 1 : 0);
    }
    for (RbRecord& rec : ds.records) {
        if (rec.outcomes.empty()) throw ConfigError("dataset record without outcomes");
        long up = 0;
        for (std::uint8_t o : rec.outcomes) up += o;
        rec.p_up = static_cast<double>(up) / static_cast<double>(rec.outcomes.size());
    }
    if (ds.records.empty()) throw ConfigError("dataset CSV contains no shots");
    return ds;
}

inline std::string fit_mode_label(const FitModeSpec& mode) {
    switch (mode.mode) {
        case FitMode::FreePinf: return "free";
        case FitMode::FixedPinf: return "fixed";
        case FitMode::CombinedHalf: return "combined";
    }
    throw InternalError("bad fit mode");
}

inline json param_to_json(const ParamEstimate& e) {
    json j;
    j["value"] = e.value;
    if (e.fixed) {
        j["fixed"] = true;
    } else {
        j["std_error"] = e.std_error;
        j["ci_95"] = json::array({e.ci_lo(), e.ci_hi()});
    }
    return j;
}

inline json fit_report_json(const FitResult& fit, const BootstrapResult* bootstrap = nullptr) {
    json j;
    j["mode"] = fit_mode_label(fit.mode);
    if (!fit.mode.pinf_is_free()) j["fixed_p_inf"] = fit.mode.pinned_value();
    j["p"] = param_to_json(fit.p);
    j["p0"] = param_to_json(fit.p0);
    j["p_inf"] = param_to_json(fit.p_inf);
    j["f_c"] = fit.f_c;
    j["f_c_ci_95"] = json::array({fit.f_c - fit.f_c_ci_half, fit.f_c + fit.f_c_ci_half});
    j["f_single"] = fit.f_single;
    j["f_single_ci_95"] =
        json::array({fit.f_single - fit.f_single_ci_half, fit.f_single + fit.f_single_ci_half});
    json diag;
    diag["weighted_residual_sum"] = fit.weighted_residual_sum;
    diag["iterations"] = fit.iterations;
    diag["converged"] = fit.converged;
    diag["dof"] = fit.dof;
    diag["warnings"] = fit.warnings;
    j["diagnostics"] = diag;
    if (bootstrap) {
        json b;
        b["p_ci_95"] = json::array({bootstrap->ci_lo, bootstrap->ci_hi});
        b["resamples"] = bootstrap->resamples;
        b["failures"] = bootstrap->failures;
        b["degenerate"] = bootstrap->degenerate;
        j["bootstrap"] = b;
    }
    return j;
}

// Minimal view of a stored fit report, as needed by the interleaved
// comparison.
struct StoredFit {
    double p = 0.0;
    double p_ci_half = std::numeric_limits<double>::quiet_NaN();
};

inline StoredFit read_fit_report(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("bad fit report " + path.string() + ": " + e.what());
    }
    if (!j.contains("p") || !j["p"].contains("value")) {
        throw ConfigError("fit report " + path.string() + " lacks a p estimate");
    }
    StoredFit f;
    f.p = j["p"]["value"].get<double>();
    if (j["p"].contains("ci_95")) {
        const auto& ci = j["p"]["ci_95"];
        if (ci.is_array() && ci.size() == 2 && ci[0].is_number() && ci[1].is_number()) {
            f.p_ci_half = (ci[1].get<double>() - ci[0].get<double>()) / 2.0;
        }
    }
    return f;
}

// Decay-curve plot data: combined success probability with the fitted
// curve, and the per-target spin-up means.
inline std::string decay_combined_csv(const AggregatedDecay& agg, const FitResult& fit) {
    std::string out = "n,mean_success,sem,fit_value\n";
    for (const DecayPoint& pt : agg.points) {
        const double sem = pt.count > 0 ? std::sqrt(pt.variance / pt.count) : 0.0;
        out += std::to_string(pt.n) + "," + format_double(pt.mean) + "," + format_double(sem) +
               "," + format_double(fit.model(pt.n)) + "\n";
    }
    return out;
}

inline std::string decay_targets_csv(const RbDataset& ds) {
    std::map<int, std::array<std::vector<double>, 2>> by_n;  // [0]=down, [1]=up
    for (const RbRecord& rec : ds.records) {
        by_n[rec.n][rec.target == Target::Up ? 1 : 0].push_back(rec.p_up);
    }
    std::string out = "n,target,mean_p_up,sem\n";
    for (const auto& [n, classes] : by_n) {
        for (int c = 0; c < 2; ++c) {
            const std::vector<double>& vals = classes[c];
            if (vals.empty()) continue;
            double mean = 0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0;
            for (double v : vals) var += (v - mean) * (v - mean);
            const double sem =
                vals.size() > 1 ? std::sqrt(var / ((vals.size() - 1.0) * vals.size())) : 0.0;
            out += std::to_string(n) + "," + (c ? "up," : "down,") + format_double(mean) + "," +
                   format_double(sem) + "\n";
        }
    }
    return out;
}

inline std::string interleaved_csv(const std::vector<InterleavedResult>& rows) {
    std::string out = "gate,f_gate,ci_half,f_gate_lo,f_gate_hi,exceeds_one\n";
    for (const InterleavedResult& r : rows) {
        out += r.gate + "," + format_double(r.f_gate) + "," + format_double(r.ci_half) + "," +
               format_double(r.f_gate - r.ci_half) + "," + format_double(r.f_gate + r.ci_half) +
               "," + (r.exceeds_one ? "1" : "0") + "\n";
    }
    return out;
}

inline json interleaved_json(const std::vector<InterleavedResult>& rows) {
    json arr = json::array();
    for (const InterleavedResult& r : rows) {
        json j;
        j["gate"] = r.gate;
        j["p_gate"] = r.p_gate;
        j["p_c"] = r.p_c;
        j["f_gate"] = r.f_gate;
        j["f_gate_ci_95"] = json::array({r.f_gate - r.ci_half, r.f_gate + r.ci_half});
        j["exceeds_one"] = r.exceeds_one;
        arr.push_back(j);
    }
    return json{{"gates", arr}};
}

inline std::string profile_csv(const std::vector<double>& detunings,
                               const std::vector<double>& p_up) {
    std::string out = "detuning_hz,p_up\n";
    for (std::size_t i = 0; i < detunings.size(); ++i) {
        out += format_double(detunings[i]) + "," + format_double(p_up[i]) + "\n";
    }
    return out;
}

}  // namespace spinrb
