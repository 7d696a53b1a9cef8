// Command-line front end: benchmarking runs, decay fits, pulse scans and
// power sweeps.  Exit codes: 0 success, 2 config error, 3 fit failure,
// 4 internal invariant violation.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinrb/spinrb.hpp"

namespace fs = std::filesystem;
using namespace spinrb;

namespace {

struct CommonArgs {
    std::string preset;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool stamp = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_stamp = false) {
    cmd->add_option("--preset", args.preset,
                    "named preset: electron-square, electron-sinc, nuclear-square, "
                    "electron-power-sweep");
    cmd->add_option("--config", args.config_path, "JSON config file (see README for the schema)");
    cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", args.seed, "override the experiment seed");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
    if (with_stamp) {
        cmd->add_flag("--stamp", args.stamp,
                      "record the wall-clock time in the dataset sidecar (off by default so "
                      "identical runs are byte-identical)");
    }
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    if (!args.preset.empty() && !args.config_path.empty()) {
        throw ConfigError("--preset and --config are mutually exclusive; put a \"preset\" key "
                          "in the config file instead");
    }
    ExperimentConfig cfg;
    if (!args.config_path.empty()) {
        cfg = load_experiment_config(args.config_path);
    } else if (!args.preset.empty()) {
        cfg = resolve_preset(args.preset);
    } else {
        throw ConfigError("need --preset or --config");
    }
    if (args.seed) cfg.rb.seed = *args.seed;
    if (args.threads) cfg.rb.threads = *args.threads;
    if (args.out_dir != ".") cfg.out_dir = args.out_dir;
    return cfg;
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory " + p.string());
    return p;
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

FitModeSpec parse_mode(const std::string& s) {
    if (s == "free") return FitModeSpec::free_pinf();
    if (s == "combined") return FitModeSpec::combined_half();
    if (s.rfind("fixed=", 0) == 0) {
        try {
            return FitModeSpec::fixed_pinf(std::stod(s.substr(6)));
        } catch (const std::exception&) {
            throw ConfigError("bad fixed P_inf value in --mode " + s);
        }
    }
    throw ConfigError("unknown fit mode '" + s + "' (expected free, fixed=<v> or combined)");
}

int cmd_clifford_verify() {
    const CliffordGroup group = build_clifford_group();  // throws on closure/distinctness bugs
    std::cout << "Clifford group decompositions:\n";
    for (const CliffordElement& e : group.elements()) {
        std::cout << "  " << e.index << ": ";
        for (std::size_t i = 0; i < e.decomposition.size(); ++i) {
            std::cout << (i ? " " : "") << gate_label(e.decomposition[i]);
        }
        std::cout << "\n";
    }
    std::cout << "closure: ok (" << CliffordGroup::kSize * CliffordGroup::kSize
              << " products stay in the group)\n";
    for (int a = 1; a <= CliffordGroup::kSize; ++a) group.inverse(a);
    std::cout << "inverses: ok\n";
    const double mean = group.mean_physical_gates();
    std::cout << "mean physical gates per Clifford: " << format_double(mean) << "\n";
    if (mean != 1.875) throw InternalError("mean physical-gate count must be exactly 1.875");
    return 0;
}

int cmd_pulse_profile(const CommonArgs& args, const std::string& shape_s, double pi_duration,
                      double span, int points, double time_quantum) {
    if (!(pi_duration > 0)) throw ConfigError("--pi-duration must be > 0");
    if (points < 2) throw ConfigError("--points must be >= 2");
    if (!(span > 0)) throw ConfigError("--span must be > 0");
    PulseSpec spec;
    spec.shape = parse_shape(shape_s);
    spec.pi_pulse_duration = pi_duration;
    NoiseModel noise;
    noise.time_quantum = time_quantum;
    std::vector<double> detunings(points);
    for (int i = 0; i < points; ++i) {
        detunings[i] = -span / 2 + span * i / (points - 1);
    }
    std::vector<double> p_up(points);
    spec.rotation_angle = kPi;
    for (int i = 0; i < points; ++i) {
        PulseSpec s = spec;
        s.detuning = detunings[i];
        p_up[i] = apply_pulse(QubitState::down(), s, noise).population_up();
    }
    const fs::path out = ensure_out_dir(args.out_dir) / "pulse_profile.csv";
    write_text_file(out, profile_csv(detunings, p_up));
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_rb_run(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    const CliffordGroup group = build_clifford_group();
    RbDataset ds = run_experiment(group, cfg.rb);
    if (args.stamp) ds.timestamp = now_iso8601();
    const fs::path dir = ensure_out_dir(cfg.out_dir);
    write_dataset(ds, dir / "dataset.csv");
    std::cout << "wrote " << (dir / "dataset.csv").string() << " (" << ds.records.size()
              << " sequences, " << cfg.rb.total_shots() << " shots)\n";
    return 0;
}

int cmd_rb_fit(const CommonArgs& args, const std::string& dataset_path, const std::string& mode_s,
               int bootstrap_n) {
    const RbDataset ds = read_dataset(dataset_path);
    const FitModeSpec mode = parse_mode(mode_s);
    const AggregatedDecay agg = aggregate(ds, mode);
    const FitResult fit = fit_decay(agg, mode);
    std::optional<BootstrapResult> boot;
    if (bootstrap_n > 0) boot = bootstrap_ci(agg, mode, bootstrap_n, ds.config.seed);

    const fs::path dir = ensure_out_dir(args.out_dir);
    write_text_file(dir / "fit_report.json",
                    fit_report_json(fit, boot ? &*boot : nullptr).dump(2) + "\n");
    write_text_file(dir / "decay_combined.csv", decay_combined_csv(agg, fit));
    write_text_file(dir / "decay_targets.csv", decay_targets_csv(ds));
    std::cout << "p = " << format_double(fit.p.value) << " (95% CI +-"
              << format_double(fit.p.ci_half) << "), F_c = " << format_double(fit.f_c)
              << ", F_single = " << format_double(fit.f_single) << "\n"
              << "wrote " << (dir / "fit_report.json").string() << "\n";
    return 0;
}

int cmd_rb_interleaved(const CommonArgs& args, const std::string& reference_path,
                       const std::vector<std::string>& dataset_paths, const std::string& mode_s) {
    const StoredFit ref = read_fit_report(reference_path);
    FitResult ref_fit;
    ref_fit.p.value = ref.p;
    ref_fit.p.ci_half = ref.p_ci_half;
    const FitModeSpec mode = parse_mode(mode_s);

    std::vector<InterleavedResult> rows;
    for (const std::string& path : dataset_paths) {
        const RbDataset ds = read_dataset(path);
        if (!ds.config.interleaved_gate) {
            throw ConfigError(path + ": dataset was not produced by an interleaved run");
        }
        const FitResult fit = fit_decay(aggregate(ds, mode), mode);
        rows.push_back(interleaved_result(ref_fit, fit, gate_label(*ds.config.interleaved_gate)));
    }
    const fs::path dir = ensure_out_dir(args.out_dir);
    write_text_file(dir / "interleaved_report.csv", interleaved_csv(rows));
    write_text_file(dir / "interleaved_report.json", interleaved_json(rows).dump(2) + "\n");
    for (const InterleavedResult& r : rows) {
        std::cout << r.gate << ": F_gate = " << format_double(r.f_gate) << " +- "
                  << format_double(r.ci_half) << (r.exceeds_one ? " (above 1)" : "") << "\n";
    }
    std::cout << "wrote " << (dir / "interleaved_report.json").string() << "\n";
    return 0;
}

int cmd_sweep_run(const CommonArgs& args) {
    ExperimentConfig cfg = resolve_config(args);
    const CliffordGroup group = build_clifford_group();
    const SweepResult result = run_sweep(group, cfg);
    const fs::path dir = ensure_out_dir(cfg.out_dir);
    write_text_file(dir / "sweep_results.csv", sweep_csv(result));
    write_text_file(dir / "sweep_results.json", sweep_json(result).dump(2) + "\n");
    for (const SweepRow& row : result.rows) {
        std::cout << format_double(row.point.pi_pulse_duration * 1e6) << " us "
                  << shape_label(row.point.shape) << ": ";
        if (row.ok) {
            std::cout << "F_c = " << format_double(row.fit.f_c) << " +- "
                      << format_double(row.fit.f_c_ci_half) << "\n";
        } else {
            std::cout << "fit failed: " << row.error << "\n";
        }
    }
    std::cout << "wrote " << (dir / "sweep_results.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinrb: single-qubit randomized-benchmarking laboratory"};
    app.require_subcommand(1);

    CLI::App* clifford = app.add_subcommand("clifford", "Clifford group utilities");
    clifford->require_subcommand(1);
    clifford->add_subcommand("verify",
                             "print the 24 decompositions and check closure, inverses and the "
                             "1.875 gate average");

    CommonArgs profile_args;
    std::string profile_shape = "square";
    double profile_pi = 4.5e-6, profile_span = 2e6, profile_quantum = 0.0;
    int profile_points = 401;
    CLI::App* pulse = app.add_subcommand("pulse", "pulse-level tools");
    pulse->require_subcommand(1);
    CLI::App* profile = pulse->add_subcommand(
        "profile", "excitation profile: spin-up probability of a pi-pulse vs detuning (CSV)");
    profile->add_option("--shape", profile_shape, "square or sinc3")->capture_default_str();
    profile->add_option("--pi-duration", profile_pi, "pi-pulse duration in seconds")
        ->capture_default_str();
    profile->add_option("--span", profile_span, "full detuning span in Hz, centred on resonance")
        ->capture_default_str();
    profile->add_option("--points", profile_points, "number of scan points")
        ->capture_default_str();
    profile->add_option("--time-quantum", profile_quantum,
                        "baseband duration grid in seconds (0 = off)")
        ->capture_default_str();
    profile->add_option("--out", profile_args.out_dir, "output directory")
        ->capture_default_str();

    CLI::App* rb = app.add_subcommand("rb", "randomized benchmarking");
    rb->require_subcommand(1);

    CommonArgs run_args;
    CLI::App* rb_run = rb->add_subcommand("run", "run an experiment and write dataset.csv/.json");
    add_common(rb_run, run_args, /*with_stamp=*/true);

    CommonArgs fit_args;
    std::string fit_dataset, fit_mode = "combined";
    int fit_bootstrap = 0;
    CLI::App* rb_fit = rb->add_subcommand("fit", "fit a decay model to a dataset");
    rb_fit->add_option("dataset", fit_dataset, "dataset CSV (sidecar JSON alongside)")
        ->required();
    rb_fit->add_option("--mode", fit_mode, "free, fixed=<v> or combined")->capture_default_str();
    rb_fit->add_option("--bootstrap", fit_bootstrap,
                       "residual-bootstrap resamples for the p confidence interval (0 = off)")
        ->capture_default_str();
    rb_fit->add_option("--out", fit_args.out_dir, "output directory")->capture_default_str();

    CommonArgs il_args;
    std::string il_reference, il_mode = "combined";
    std::vector<std::string> il_datasets;
    CLI::App* rb_il = rb->add_subcommand(
        "interleaved", "combine a reference fit report with interleaved datasets into F_gate rows");
    rb_il->add_option("--reference", il_reference, "reference fit_report.json")->required();
    rb_il->add_option("datasets", il_datasets, "interleaved dataset CSVs")->required();
    rb_il->add_option("--mode", il_mode, "fit mode for the interleaved datasets")
        ->capture_default_str();
    rb_il->add_option("--out", il_args.out_dir, "output directory")->capture_default_str();

    CLI::App* sweep = app.add_subcommand("sweep", "pulse-duration sweeps");
    sweep->require_subcommand(1);
    CommonArgs sweep_args;
    CLI::App* sweep_run_cmd =
        sweep->add_subcommand("run", "run an experiment + combined fit per sweep point");
    add_common(sweep_run_cmd, sweep_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (clifford->got_subcommand("verify")) return cmd_clifford_verify();
        if (pulse->got_subcommand("profile")) {
            return cmd_pulse_profile(profile_args, profile_shape, profile_pi, profile_span,
                                     profile_points, profile_quantum);
        }
        if (rb->got_subcommand("run")) return cmd_rb_run(run_args);
        if (rb->got_subcommand("fit")) {
            return cmd_rb_fit(fit_args, fit_dataset, fit_mode, fit_bootstrap);
        }
        if (rb->got_subcommand("interleaved")) {
            return cmd_rb_interleaved(il_args, il_reference, il_datasets, il_mode);
        }
        if (sweep->got_subcommand("run")) return cmd_sweep_run(sweep_args);
        std::cerr << "no command selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
