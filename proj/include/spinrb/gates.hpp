#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "spinrb/errors.hpp"
#include "spinrb/linalg.hpp"

namespace spinrb {

inline constexpr double kPi = 3.14159265358979323846;

// The physical gate alphabet: pi and pi/2 rotations about the x and y
// axes, plus the identity.  X means exp(-i pi sigma_x / 2), X/2 means
// exp(-i pi sigma_x / 4), -X/2 the inverse of X/2, and likewise for Y.
enum class PhysicalGate {
    Identity,
    X,
    Y,
    XHalf,
    YHalf,
    XHalfMinus,
    YHalfMinus,
};

inline constexpr std::array<PhysicalGate, 7> kAllPhysicalGates = {
    PhysicalGate::Identity,   PhysicalGate::X,          PhysicalGate::Y,
    PhysicalGate::XHalf,      PhysicalGate::YHalf,      PhysicalGate::XHalfMinus,
    PhysicalGate::YHalfMinus,
};

// Signed rotation in units of pi (+1, +1/2 or -1/2); 0 for the identity.
inline double gate_angle_in_pi(PhysicalGate g) {
    switch (g) {
        case PhysicalGate::Identity: return 0.0;
        case PhysicalGate::X:
        case PhysicalGate::Y: return 1.0;
        case PhysicalGate::XHalf:
        case PhysicalGate::YHalf: return 0.5;
        case PhysicalGate::XHalfMinus:
        case PhysicalGate::YHalfMinus: return -0.5;
    }
    throw InternalError("gate_angle_in_pi: bad gate");
}

inline bool gate_axis_is_y(PhysicalGate g) {
    return g == PhysicalGate::Y || g == PhysicalGate::YHalf || g == PhysicalGate::YHalfMinus;
}

// Drive phase that realises the gate as a resonant pulse: 0 for +x,
// pi/2 for +y, pi for -x, 3pi/2 for -y.  Negative rotations become
// positive rotations about the opposite axis.
inline double gate_pulse_phase(PhysicalGate g) {
    switch (g) {
        case PhysicalGate::X:
        case PhysicalGate::XHalf: return 0.0;
        case PhysicalGate::Y:
        case PhysicalGate::YHalf: return kPi / 2.0;
        case PhysicalGate::XHalfMinus: return kPi;
        case PhysicalGate::YHalfMinus: return 3.0 * kPi / 2.0;
        case PhysicalGate::Identity: break;
    }
    throw InternalError("gate_pulse_phase: identity gate has no pulse");
}

// Magnitude of the pulse rotation (pi or pi/2).
inline double gate_pulse_angle(PhysicalGate g) {
    return std::abs(gate_angle_in_pi(g)) * kPi;
}

inline Mat2 gate_unitary(PhysicalGate g) {
    if (g == PhysicalGate::Identity) return kIdentity;
    const double angle = gate_angle_in_pi(g) * kPi;
    return gate_axis_is_y(g) ? rotation(0, 1, 0, angle) : rotation(1, 0, 0, angle);
}

inline std::string gate_label(PhysicalGate g) {
    switch (g) {
        case PhysicalGate::Identity: return "I";
        case PhysicalGate::X: return "X";
        case PhysicalGate::Y: return "Y";
        case PhysicalGate::XHalf: return "X/2";
        case PhysicalGate::YHalf: return "Y/2";
        case PhysicalGate::XHalfMinus: return "-X/2";
        case PhysicalGate::YHalfMinus: return "-Y/2";
    }
    throw InternalError("gate_label: bad gate");
}

inline PhysicalGate parse_gate(std::string_view s) {
    for (PhysicalGate g : kAllPhysicalGates) {
        if (gate_label(g) == s) return g;
    }
    throw ConfigError("unknown physical gate '" + std::string(s) +
                      "' (expected one of I, X, Y, X/2, Y/2, -X/2, -Y/2)");
}

}  // namespace spinrb
