#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spinrb/io.hpp"
#include "spinrb/rb.hpp"

namespace spinrb {

// One point of a pulse-power sweep, parameterized by the pi-pulse
// duration it produces (the attenuation chain between source power and
// Rabi frequency is not modelled).
struct SweepPoint {
    double pi_pulse_duration = 0.0;
    PulseShape shape = PulseShape::Square;
};

struct ExperimentConfig {
    RbConfig rb;
    std::string preset;  // name this config was resolved from, if any
    std::string out_dir = ".";
    std::vector<SweepPoint> sweep;
};

namespace detail {

inline std::vector<int> log2_lengths(int max_n) {
    std::vector<int> lengths;
    for (int n = 1; n <= max_n; n *= 2) lengths.push_back(n);
    return lengths;
}

inline NoiseModel default_electron_noise() {
    NoiseModel noise;
    noise.detuning_sigma = 1.8e3 * kFwhmToSigma;  // 1.8 kHz resonance linewidth (FWHM)
    noise.time_quantum = 20e-9;                   // baseband generator resolution
    return noise;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
    return {"electron-square", "electron-sinc", "nuclear-square", "electron-power-sweep"};
}

// Fully populated configurations mirroring the hardware runs this
// simulator models: electron-spin benchmarking with square or sinc-3
// pulses, the slow nuclear-spin run, and a pulse-duration sweep.
inline ExperimentConfig resolve_preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.preset = name;
    if (name == "electron-square" || name == "electron-sinc" ||
        name == "electron-power-sweep") {
        cfg.rb.lengths = detail::log2_lengths(512);
        cfg.rb.sequences_per_length = 15;
        cfg.rb.shots_per_sequence = 200;
        cfg.rb.pulse_shape = name == "electron-sinc" ? PulseShape::Sinc3 : PulseShape::Square;
        // Optimal-power pi lengths: 2.08 us square, 11.06 us sinc-3 (equal
        // peak power).
        cfg.rb.pi_pulse_duration = name == "electron-sinc" ? 11.06e-6 : 2.08e-6;
        cfg.rb.noise = detail::default_electron_noise();
        if (name == "electron-power-sweep") {
            for (double us : {0.5, 1.0, 2.08, 4.0}) {
                cfg.sweep.push_back({us * 1e-6, PulseShape::Square});
            }
            for (double us : {5.53, 11.06, 22.12, 40.0}) {
                cfg.sweep.push_back({us * 1e-6, PulseShape::Sinc3});
            }
        }
    } else if (name == "nuclear-square") {
        cfg.rb.lengths = detail::log2_lengths(512);
        cfg.rb.lengths.push_back(1000);
        cfg.rb.sequences_per_length = 5;
        cfg.rb.shots_per_sequence = 75;
        cfg.rb.pulse_shape = PulseShape::Square;
        cfg.rb.pi_pulse_duration = 150e-6;
        cfg.rb.noise.time_quantum = 20e-9;
        // Quasi-static spread reproducing a 600 ms Gaussian dephasing
        // time: sigma = sqrt(2) / (2 pi T2*).
        cfg.rb.noise.t2_star = 0.6;
        cfg.rb.noise.detuning_sigma = std::sqrt(2.0) / (2.0 * kPi * 0.6);
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
}

inline json sweep_point_to_json(const SweepPoint& p) {
    return json{{"pi_pulse_duration", p.pi_pulse_duration}, {"pulse_shape", shape_label(p.shape)}};
}

inline json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["preset"] = cfg.preset;
    j["out_dir"] = cfg.out_dir;
    json sweep = json::array();
    for (const SweepPoint& p : cfg.sweep) sweep.push_back(sweep_point_to_json(p));
    j["sweep"] = sweep;
    json rb = rb_config_to_json(cfg.rb);
    for (auto it = rb.begin(); it != rb.end(); ++it) j[it.key()] = it.value();
    return j;
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    json rb_part = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "preset") {
            cfg.preset = it.value().get<std::string>();
        } else if (key == "out_dir") {
            cfg.out_dir = it.value().get<std::string>();
        } else if (key == "sweep") {
            if (!it.value().is_array()) throw ConfigError("sweep: expected an array");
            for (const json& pj : it.value()) {
                detail::JsonReader r(pj, "sweep[].");
                SweepPoint p;
                r.get("pi_pulse_duration", p.pi_pulse_duration);
                std::string shape = shape_label(p.shape);
                r.get("pulse_shape", shape);
                p.shape = parse_shape(shape);
                r.finish();
                if (!(p.pi_pulse_duration > 0)) {
                    throw ConfigError("sweep[].pi_pulse_duration must be > 0");
                }
                cfg.sweep.push_back(p);
            }
        } else {
            rb_part[key] = it.value();
        }
    }
    if (!cfg.preset.empty()) {
        // Preset supplies the base; explicit keys override it.
        ExperimentConfig base = resolve_preset(cfg.preset);
        json merged = rb_config_to_json(base.rb);
        for (auto it = rb_part.begin(); it != rb_part.end(); ++it) {
            if (it->is_object() && merged.contains(it.key()) && merged[it.key()].is_object()) {
                for (auto sub = it->begin(); sub != it->end(); ++sub) {
                    merged[it.key()][sub.key()] = sub.value();
                }
            } else {
                merged[it.key()] = it.value();
            }
        }
        cfg.rb = rb_config_from_json(merged);
        if (cfg.sweep.empty()) cfg.sweep = base.sweep;
    } else {
        cfg.rb = rb_config_from_json(rb_part);
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

}  // namespace spinrb
