#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spinrb/gates.hpp"
#include "spinrb/linalg.hpp"
#include "spinrb/noise.hpp"
#include "spinrb/state.hpp"

namespace spinrb {

enum class PulseShape { Square, Sinc3 };

// Amplitude envelope at normalized position s in [0, 1] of the played
// pulse.  Sinc3 is sin(u)/u truncated at u = +-3pi, peaking at 1 in the
// pulse centre.
inline double envelope(PulseShape shape, double s) {
    if (shape == PulseShape::Square) return 1.0;
    const double u = (2.0 * s - 1.0) * 3.0 * kPi;
    return std::abs(u) < 1e-12 ? 1.0 : std::sin(u) / u;
}

// Time-averaged envelope over the pulse, computed once per shape by
// composite Simpson quadrature (the integrand is smooth; 4096 panels put
// the error near machine precision).
inline double mean_envelope(PulseShape shape) {
    if (shape == PulseShape::Square) return 1.0;
    static const double sinc3_mean = [] {
        constexpr int n = 4096;
        const double h = 1.0 / n;
        double sum = envelope(PulseShape::Sinc3, 0.0) + envelope(PulseShape::Sinc3, 1.0);
        for (int i = 1; i < n; ++i) {
            sum += (i % 2 ? 4.0 : 2.0) * envelope(PulseShape::Sinc3, i * h);
        }
        return sum * h / 3.0;
    }();
    return sinc3_mean;
}

// One shaped resonant pulse in the rotating frame.  The drive phase
// selects the rotation axis (0 -> +x, pi/2 -> +y, pi -> -x, 3pi/2 -> -y);
// rotation_angle is pi or pi/2.  pi_pulse_duration is the calibrated
// length of a pi rotation for this shape and power; a pi/2 pulse plays
// the time-scaled envelope for half that at the same peak amplitude.
struct PulseSpec {
    PulseShape shape = PulseShape::Square;
    double phase = 0.0;             // rad
    double rotation_angle = kPi;    // rad, > 0
    double pi_pulse_duration = 0.0; // s
    double detuning = 0.0;          // Hz, drive minus qubit frequency

    void validate() const {
        if (!(pi_pulse_duration > 0.0)) throw std::invalid_argument("pi_pulse_duration must be > 0");
        if (!(rotation_angle > 0.0)) throw std::invalid_argument("rotation_angle must be > 0");
    }
};

// Peak Rabi frequency (Hz) that makes a noiseless on-resonance pulse
// integrate to exactly rotation_angle.  Shared by pi and pi/2 pulses of
// the same shape, mirroring fixed-source-power operation.
inline double peak_rabi_frequency(const PulseSpec& spec) {
    return 1.0 / (2.0 * mean_envelope(spec.shape) * spec.pi_pulse_duration);
}

// Rounds a duration to the baseband grid, half up.  quantum <= 0 leaves
// the duration untouched.
inline double quantize_duration(double duration, double quantum) {
    if (quantum <= 0.0) return duration;
    return std::floor(duration / quantum + 0.5) * quantum;
}

inline constexpr double kDefaultSliceBound = 0.01;  // rad of rotation per slice

namespace detail {

// exp(-i t 2pi [delta sz/2 + omega (cos(phase) sx + sin(phase) sy)/2]).
inline Mat2 constant_drive_step(double delta, double omega, double phase, double t) {
    const double mag = std::hypot(delta, omega);
    if (mag == 0.0) return kIdentity;
    const double angle = 2.0 * kPi * mag * t;
    return rotation(omega * std::cos(phase) / mag, omega * std::sin(phase) / mag, delta / mag,
                    angle);
}

}  // namespace detail

// Net propagator of a shaped pulse under H(t) = 2pi [Delta sz/2 +
// Omega(t) (cos(phase) sx + sin(phase) sy)/2], with Omega(t) =
// Omega_peak (1 + amplitude_error) envelope(t).  Per-shot detuning adds
// to the pulse detuning and the duration snaps to the baseband grid
// before anything else; the calibration is not redone, so the rounding
// shows up as a rotation error.
//
// On resonance the Hamiltonian commutes with itself at all times and the
// propagator is a single exact rotation.  Off resonance the pulse is cut
// into slices of at most slice_bound radians of rotation, each advanced
// by a fourth-order commutator-free pair of piecewise-constant
// propagators evaluated at the Gauss-Legendre nodes of the slice.
inline Mat2 pulse_propagator(const PulseSpec& spec, const NoiseModel& noise,
                             const ShotDraw& draw = {}, double slice_bound = kDefaultSliceBound) {
    spec.validate();
    const double nominal = spec.pi_pulse_duration * (spec.rotation_angle / kPi);
    const double played = quantize_duration(nominal, noise.time_quantum);
    if (!(played > 0.0)) {
        throw std::invalid_argument("pulse duration rounds to zero on the baseband grid");
    }
    const double omega_peak = peak_rabi_frequency(spec) * (1.0 + draw.amplitude_error);
    const double delta = spec.detuning + draw.detuning_offset;

    if (delta == 0.0) {
        const double angle = 2.0 * kPi * omega_peak * mean_envelope(spec.shape) * played;
        return rotation(std::cos(spec.phase), std::sin(spec.phase), 0.0, angle);
    }

    const double omega_max = 2.0 * kPi * std::hypot(delta, std::abs(omega_peak));
    const int slices = std::max(1, static_cast<int>(std::ceil(omega_max * played / slice_bound)));
    const double dt = played / slices;

    constexpr double kSqrt3 = 1.7320508075688772;
    constexpr double node_lo = 0.5 - kSqrt3 / 6.0, node_hi = 0.5 + kSqrt3 / 6.0;
    constexpr double w_lo = (3.0 - 2.0 * kSqrt3) / 12.0, w_hi = (3.0 + 2.0 * kSqrt3) / 12.0;

    Mat2 u = kIdentity;
    for (int i = 0; i < slices; ++i) {
        const double om1 = omega_peak * envelope(spec.shape, (i + node_lo) * dt / played);
        const double om2 = omega_peak * envelope(spec.shape, (i + node_hi) * dt / played);
        const Mat2 first = detail::constant_drive_step(0.5 * delta, w_hi * om1 + w_lo * om2,
                                                       spec.phase, dt);
        const Mat2 second = detail::constant_drive_step(0.5 * delta, w_lo * om1 + w_hi * om2,
                                                        spec.phase, dt);
        u = second * first * u;
    }
    return u;
}

inline QubitState apply_pulse(const QubitState& state, const PulseSpec& spec,
                              const NoiseModel& noise, const ShotDraw& draw = {},
                              double slice_bound = kDefaultSliceBound) {
    state.validate();
    QubitState out = state;
    out.apply_unitary(pulse_propagator(spec, noise, draw, slice_bound));
    return out;
}

// Deterministic detuning scan: spin-up probability after a pi-pulse on
// |down> at each detuning, with no stochastic noise.
inline std::vector<double> excitation_profile(const PulseSpec& pulse,
                                              const std::vector<double>& detunings) {
    PulseSpec spec = pulse;
    spec.rotation_angle = kPi;
    std::vector<double> p_up;
    p_up.reserve(detunings.size());
    for (double delta : detunings) {
        spec.detuning = delta;
        p_up.push_back(apply_pulse(QubitState::down(), spec, NoiseModel{}).population_up());
    }
    return p_up;
}

}  // namespace spinrb
