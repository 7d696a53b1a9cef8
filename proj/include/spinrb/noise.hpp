#pragma once

#include <cmath>

#include "spinrb/errors.hpp"
#include "spinrb/rng.hpp"

namespace spinrb {

// FWHM of a Gaussian line -> standard deviation (1 / (2 sqrt(2 ln 2))).
inline constexpr double kFwhmToSigma = 0.42466090014400953;

// Physical error knobs for the simulated qubit.  Quasi-static noise
// (detuning, amplitude) is drawn once per shot, modelling slow drifts.
struct NoiseModel {
    double detuning_sigma = 0.0;          // Hz, per-shot Gaussian detuning spread
    double amplitude_error_sigma = 0.0;   // fractional Rabi-amplitude spread
    double time_quantum = 0.0;            // s, baseband duration grid; 0 disables
    double depolarizing_per_clifford = 0.0;
    double t2_star = 0.0;                 // s, idle dephasing time; 0 or inf disables
    double inter_gate_gap = 0.0;          // s of idle time after each Clifford

    bool has_shot_noise() const { return detuning_sigma > 0.0 || amplitude_error_sigma > 0.0; }

    bool idle_dephasing_active() const {
        return inter_gate_gap > 0.0 && t2_star > 0.0 && std::isfinite(t2_star);
    }

    double idle_dephasing_factor() const {
        return idle_dephasing_active() ? std::exp(-inter_gate_gap / t2_star) : 1.0;
    }

    void validate() const {
        if (detuning_sigma < 0 || amplitude_error_sigma < 0 || time_quantum < 0 ||
            t2_star < 0 || inter_gate_gap < 0) {
            throw ConfigError("noise model fields must be non-negative");
        }
        if (depolarizing_per_clifford < 0 || depolarizing_per_clifford >= 1) {
            throw ConfigError("depolarizing_per_clifford must be in [0, 1)");
        }
    }
};

// State-preparation and measurement errors.
struct SpamModel {
    double init_error = 0.0;             // P(prepared |up> instead of |down>)
    double readout_fidelity_up = 1.0;    // P(report up | state up)
    double readout_fidelity_down = 1.0;  // P(report down | state down)

    bool is_perfect() const {
        return init_error == 0.0 && readout_fidelity_up == 1.0 && readout_fidelity_down == 1.0;
    }

    void validate() const {
        const auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!in01(init_error) || !in01(readout_fidelity_up) || !in01(readout_fidelity_down)) {
            throw ConfigError("SPAM probabilities must be in [0, 1]");
        }
    }
};

// One quasi-static noise realization, fixed for the duration of a shot.
struct ShotDraw {
    double detuning_offset = 0.0;  // Hz, added to every pulse's detuning
    double amplitude_error = 0.0;  // fractional, scales every pulse's Rabi amplitude
};

// Consumes one normal pair iff the model has any per-shot noise, so that
// noise-free configurations never touch the noise stream.
inline ShotDraw draw_shot_noise(const NoiseModel& noise, SplitRng& rng) {
    ShotDraw draw;
    if (noise.has_shot_noise()) {
        double z0 = 0.0, z1 = 0.0;
        rng.normal_pair(z0, z1);
        draw.detuning_offset = z0 * noise.detuning_sigma;
        draw.amplitude_error = z1 * noise.amplitude_error_sigma;
    }
    return draw;
}

// Default spin-system constants.  The simulation itself runs in the
// rotating frame where only the detuning matters; these derive the
// absolute resonance frequencies for configuration bookkeeping.
struct DeviceParams {
    double gamma_e = 27.97e9;      // Hz/T, electron gyromagnetic ratio
    double gamma_n = 17.23e6;      // Hz/T, nuclear gyromagnetic ratio
    double hyperfine_a = 96.9e6;   // Hz, contact hyperfine coupling
    double b0 = 1.5;               // T, static field

    double electron_resonance() const { return gamma_e * b0 + hyperfine_a / 2.0; }
    double nuclear_resonance() const { return gamma_n * b0; }

    void validate() const {
        if (gamma_e <= 0 || gamma_n <= 0 || hyperfine_a <= 0 || b0 <= 0) {
            throw ConfigError("device parameters must be positive");
        }
    }
};

}  // namespace spinrb
