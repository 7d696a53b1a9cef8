#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spinrb/clifford.hpp"
#include "spinrb/errors.hpp"
#include "spinrb/noise.hpp"
#include "spinrb/pulse.hpp"
#include "spinrb/rng.hpp"
#include "spinrb/state.hpp"

namespace spinrb {

enum class TargetPolicy { RandomPerSequence, AlwaysDown };

// Full description of a benchmarking run.  K random sequences per length,
// r single shots per sequence.
struct RbConfig {
    std::vector<int> lengths;
    int sequences_per_length = 15;  // K
    int shots_per_sequence = 200;   // r
    TargetPolicy target_policy = TargetPolicy::RandomPerSequence;
    std::optional<PhysicalGate> interleaved_gate;
    // Extra depolarization attached to each interleaved gate.  The
    // per-Clifford depolarization applies to the random Cliffords and the
    // recovery gate only, so this knob alone sets the interleaved gate's
    // excess error.
    double interleaved_extra_depolarizing = 0.0;
    std::uint64_t seed = 1;
    PulseShape pulse_shape = PulseShape::Square;
    double pi_pulse_duration = 2.08e-6;
    NoiseModel noise;
    SpamModel spam;
    std::uint64_t max_total_shots = 100'000'000;
    int threads = 1;  // 0 = hardware concurrency

    std::uint64_t total_shots() const {
        return static_cast<std::uint64_t>(lengths.size()) *
               static_cast<std::uint64_t>(sequences_per_length) *
               static_cast<std::uint64_t>(shots_per_sequence);
    }

    void validate() const {
        if (lengths.empty()) throw ConfigError("lengths must not be empty");
        for (int n : lengths) {
            if (n < 1) throw ConfigError("every sequence length must be >= 1");
        }
        if (sequences_per_length < 1) throw ConfigError("sequences_per_length must be >= 1");
        if (shots_per_sequence < 1) throw ConfigError("shots_per_sequence must be >= 1");
        if (!(pi_pulse_duration > 0)) throw ConfigError("pi_pulse_duration must be > 0");
        if (interleaved_extra_depolarizing < 0 || interleaved_extra_depolarizing >= 1) {
            throw ConfigError("interleaved_extra_depolarizing must be in [0, 1)");
        }
        if (threads < 0) throw ConfigError("threads must be >= 0");
        noise.validate();
        spam.validate();
        if (total_shots() > max_total_shots) {
            throw ConfigError("experiment would need " + std::to_string(total_shots()) +
                              " shots, above the configured cap of " +
                              std::to_string(max_total_shots));
        }
    }
};

// One random sequence: N random Cliffords (interleaved gates inserted
// after each when benchmarking a specific gate) plus the recovery gate.
struct RbSequence {
    int length = 0;  // N, the number of random Cliffords
    std::vector<int> clifford_indices;
    std::vector<std::uint8_t> interleaved_slot;  // parallel to clifford_indices
    Target target = Target::Down;
    bool interleaved = false;
};

struct RbRecord {
    int n = 0;
    int k = 0;
    Target target = Target::Down;
    std::vector<std::uint8_t> outcomes;  // 1 = reported up
    double p_up = 0.0;                   // mean of outcomes
};

struct RbDataset {
    RbConfig config;
    std::vector<RbRecord> records;
    std::string timestamp;  // empty unless explicitly stamped
};

// Draw order per sequence: N Clifford indices, then the target (one
// uniform, only under RandomPerSequence).  The recovery gate is
// deterministic, so reference and interleaved runs with the same seed
// share their random Cliffords.
inline RbSequence generate_sequence(const CliffordGroup& group, int n, SplitRng& rng,
                                    TargetPolicy policy,
                                    std::optional<PhysicalGate> interleaved_gate = std::nullopt) {
    RbSequence seq;
    seq.length = n;
    seq.interleaved = interleaved_gate.has_value();
    const int gate_index =
        seq.interleaved ? group.single_gate_element(*interleaved_gate).index : 0;
    seq.clifford_indices.reserve(seq.interleaved ? 2 * n + 1 : n + 1);
    for (int i = 0; i < n; ++i) {
        seq.clifford_indices.push_back(rng.uniform_int(CliffordGroup::kSize) + 1);
        seq.interleaved_slot.push_back(0);
        if (seq.interleaved) {
            seq.clifford_indices.push_back(gate_index);
            seq.interleaved_slot.push_back(1);
        }
    }
    seq.target = Target::Down;
    if (policy == TargetPolicy::RandomPerSequence && rng.uniform() < 0.5) seq.target = Target::Up;
    seq.clifford_indices.push_back(recovery_gate(group, seq.clifford_indices, seq.target).index);
    seq.interleaved_slot.push_back(0);
    return seq;
}

namespace detail {

// Per-shot cache of pulse propagators.  Within a shot the quasi-static
// noise draw is fixed, so each of the six driven gates has one propagator
// no matter how often it appears in the sequence.
class GatePropagators {
public:
    GatePropagators(PulseShape shape, double pi_duration, const NoiseModel& noise,
                    const ShotDraw& draw)
        : shape_(shape), pi_duration_(pi_duration), noise_(&noise), draw_(draw) {}

    const Mat2& get(PhysicalGate g) {
        auto& slot = cache_[static_cast<std::size_t>(g)];
        if (!slot) {
            PulseSpec spec;
            spec.shape = shape_;
            spec.phase = gate_pulse_phase(g);
            spec.rotation_angle = gate_pulse_angle(g);
            spec.pi_pulse_duration = pi_duration_;
            slot = pulse_propagator(spec, *noise_, draw_);
        }
        return *slot;
    }

private:
    PulseShape shape_;
    double pi_duration_;
    const NoiseModel* noise_;
    ShotDraw draw_;
    std::array<std::optional<Mat2>, kAllPhysicalGates.size()> cache_;
};

// Runs the full gate sequence on the given initial state: each Clifford's
// physical pulses, then the per-Clifford (or interleaved-extra)
// depolarization, then any configured idle dephasing.  The identity gate
// takes zero time and contributes no pulse.
inline QubitState evolve_sequence(const CliffordGroup& group, const RbSequence& seq,
                                  const RbConfig& cfg, const QubitState& initial,
                                  const ShotDraw& draw) {
    GatePropagators gates(cfg.pulse_shape, cfg.pi_pulse_duration, cfg.noise, draw);
    const double dephase = cfg.noise.idle_dephasing_factor();
    QubitState state = initial;
    for (std::size_t i = 0; i < seq.clifford_indices.size(); ++i) {
        for (PhysicalGate g : group.element(seq.clifford_indices[i]).decomposition) {
            if (g == PhysicalGate::Identity) continue;
            state.apply_unitary(gates.get(g));
        }
        const double p_dep = seq.interleaved_slot[i] ? cfg.interleaved_extra_depolarizing
                                                     : cfg.noise.depolarizing_per_clifford;
        if (p_dep > 0.0) state.apply_depolarizing(p_dep);
        if (dephase < 1.0) state.apply_dephasing(dephase);
    }
    return state;
}

// Projective sigma_z readout followed by the confusion channel.
inline bool sample_readout(double p_up_physical, const SpamModel& spam, SplitRng& meas_rng) {
    const bool up = meas_rng.uniform() < p_up_physical;
    if (spam.readout_fidelity_up == 1.0 && spam.readout_fidelity_down == 1.0) return up;
    const double u = meas_rng.uniform();
    return up ? u < spam.readout_fidelity_up : u >= spam.readout_fidelity_down;
}

}  // namespace detail

// One single-shot repetition: prepare |down> (flipped with probability
// init_error), draw the quasi-static noise, run the sequence, sample the
// projective outcome and push it through the readout confusion.
inline bool run_shot(const CliffordGroup& group, const RbSequence& seq, const RbConfig& cfg,
                     SplitRng& noise_rng, SplitRng& meas_rng) {
    QubitState initial = QubitState::down();
    if (cfg.spam.init_error > 0.0 && noise_rng.bernoulli(cfg.spam.init_error)) {
        initial = QubitState::up();
    }
    const ShotDraw draw = draw_shot_noise(cfg.noise, noise_rng);
    const QubitState final_state = detail::evolve_sequence(group, seq, cfg, initial, draw);
    return detail::sample_readout(final_state.population_up(), cfg.spam, meas_rng);
}

namespace detail {

// Work for one (length, k) slot.  Without per-shot continuous noise the
// sequence's final state is shot-independent per initial state, so it is
// evolved at most twice and only the sampling consumes per-shot streams;
// the draws are identical to the shot-by-shot path either way.
inline RbRecord run_sequence_record(const CliffordGroup& group, const RbConfig& cfg, int n,
                                    int k) {
    SplitRng seq_rng = make_stream(cfg.seed, stream::kSequence, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(k));
    const RbSequence seq =
        generate_sequence(group, n, seq_rng, cfg.target_policy, cfg.interleaved_gate);

    RbRecord rec;
    rec.n = n;
    rec.k = k;
    rec.target = seq.target;
    rec.outcomes.resize(cfg.shots_per_sequence);

    const bool shot_invariant = !cfg.noise.has_shot_noise();
    std::optional<double> p_up_down_init, p_up_up_init;
    long up_count = 0;
    for (int shot = 0; shot < cfg.shots_per_sequence; ++shot) {
        SplitRng noise_rng =
            make_stream(cfg.seed, stream::kShotNoise, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(shot));
        SplitRng meas_rng =
            make_stream(cfg.seed, stream::kShotMeas, static_cast<std::uint64_t>(n),
                        static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(shot));
        bool reported_up;
        if (shot_invariant) {
            const bool flipped =
                cfg.spam.init_error > 0.0 && noise_rng.bernoulli(cfg.spam.init_error);
            std::optional<double>& p_cache = flipped ? p_up_up_init : p_up_down_init;
            if (!p_cache) {
                p_cache = evolve_sequence(group, seq, cfg,
                                          flipped ? QubitState::up() : QubitState::down(), {})
                              .population_up();
            }
            reported_up = sample_readout(*p_cache, cfg.spam, meas_rng);
        } else {
            reported_up = run_shot(group, seq, cfg, noise_rng, meas_rng);
        }
        rec.outcomes[shot] = reported_up ? 1 : 0;
        up_count += reported_up ? 1 : 0;
    }
    rec.p_up = static_cast<double>(up_count) / cfg.shots_per_sequence;
    return rec;
}

}  // namespace detail

// Runs the whole experiment.  Deterministic for a given seed regardless
// of thread count: every (n, k, shot) has its own derived random stream
// and records are assembled in (lengths-order, k) order.
inline RbDataset run_experiment(const CliffordGroup& group, const RbConfig& cfg) {
    cfg.validate();
    RbDataset out;
    out.config = cfg;
    const std::size_t tasks =
        cfg.lengths.size() * static_cast<std::size_t>(cfg.sequences_per_length);
    out.records.resize(tasks);

    unsigned n_threads = cfg.threads == 0 ? std::thread::hardware_concurrency()
                                          : static_cast<unsigned>(cfg.threads);
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<std::size_t>(n_threads, tasks);

    const auto worker_body = [&](std::size_t task) {
        const std::size_t li = task / cfg.sequences_per_length;
        const int k = static_cast<int>(task % cfg.sequences_per_length);
        out.records[task] = detail::run_sequence_record(group, cfg, cfg.lengths[li], k);
    };

    if (n_threads <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) worker_body(t);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
                    worker_body(t);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace spinrb
