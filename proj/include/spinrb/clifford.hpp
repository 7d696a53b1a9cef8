#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spinrb/errors.hpp"
#include "spinrb/gates.hpp"
#include "spinrb/linalg.hpp"

namespace spinrb {

// Entrywise tolerance for matching a canonical unitary against the group
// table.  Far above accumulation error for products of a few exact gate
// matrices, far below the distance between distinct elements (~0.4).
inline constexpr double kCliffordMatchTol = 1e-9;

// One of the 24 single-qubit Clifford gates: its 1-based table index, its
// decomposition into physical gates (in time order, first gate applied
// first) and the canonical-phase unitary of that product.
struct CliffordElement {
    int index = 0;
    std::vector<PhysicalGate> decomposition;
    Mat2 unitary;
};

namespace detail {

// The 24 decompositions, row i holding element i+1.  Gates are listed in
// the order they are applied to the qubit.
inline const std::array<std::vector<PhysicalGate>, 24>& clifford_table() {
    using G = PhysicalGate;
    static const std::array<std::vector<PhysicalGate>, 24> table = {{
        {G::Identity},
        {G::YHalf, G::XHalf},
        {G::XHalfMinus, G::YHalfMinus},
        {G::X},
        {G::YHalfMinus, G::XHalfMinus},
        {G::XHalf, G::YHalfMinus},
        {G::Y},
        {G::YHalfMinus, G::XHalf},
        {G::XHalf, G::YHalf},
        {G::X, G::Y},
        {G::YHalf, G::XHalfMinus},
        {G::XHalfMinus, G::YHalf},
        {G::YHalf, G::X},
        {G::XHalfMinus},
        {G::XHalf, G::YHalfMinus, G::XHalfMinus},
        {G::YHalfMinus},
        {G::XHalf},
        {G::XHalf, G::YHalf, G::XHalf},
        {G::YHalfMinus, G::X},
        {G::XHalf, G::Y},
        {G::XHalf, G::YHalfMinus, G::XHalf},
        {G::YHalf},
        {G::XHalfMinus, G::Y},
        {G::XHalf, G::YHalf, G::XHalfMinus},
    }};
    return table;
}

}  // namespace detail

// Product of a gate list in time order: the last gate ends up leftmost.
inline Mat2 decomposition_unitary(const std::vector<PhysicalGate>& gates) {
    Mat2 u = kIdentity;
    for (PhysicalGate g : gates) u = gate_unitary(g) * u;
    return u;
}

class CliffordGroup {
public:
    static constexpr int kSize = 24;

    const CliffordElement& element(int index) const {
        if (index < 1 || index > kSize) throw InternalError("Clifford index out of range");
        return elements_[index - 1];
    }

    const std::array<CliffordElement, kSize>& elements() const { return elements_; }

    // Index of the element whose canonical unitary matches u, if any.
    std::optional<int> find(const Mat2& u) const {
        const Mat2 cu = canonicalize(u);
        for (const CliffordElement& e : elements_) {
            if (max_abs_diff(e.unitary, cu) < kCliffordMatchTol) return e.index;
        }
        return std::nullopt;
    }

    // Group element equal to "apply a, then b".
    const CliffordElement& compose(int a, int b) const {
        const Mat2 u = element(b).unitary * element(a).unitary;
        const std::optional<int> idx = find(u);
        if (!idx) throw InternalError("Clifford composition left the group (numerical drift?)");
        return element(*idx);
    }

    const CliffordElement& inverse(int a) const {
        const std::optional<int> idx = find(element(a).unitary.adjoint());
        if (!idx) throw InternalError("Clifford inverse not found");
        return element(*idx);
    }

    // Element whose decomposition is exactly the given single gate.
    const CliffordElement& single_gate_element(PhysicalGate g) const {
        for (const CliffordElement& e : elements_) {
            if (e.decomposition.size() == 1 && e.decomposition[0] == g) return e;
        }
        throw ConfigError("gate " + gate_label(g) + " has no single-gate Clifford counterpart");
    }

    // Physical gates per element averaged over the table (identity counts
    // as one gate).
    double mean_physical_gates() const {
        std::size_t total = 0;
        for (const CliffordElement& e : elements_) total += e.decomposition.size();
        return static_cast<double>(total) / kSize;
    }

    friend CliffordGroup build_clifford_group();

private:
    std::array<CliffordElement, kSize> elements_;
};

// Measurement target for a benchmarking sequence: one of the two
// sigma_z eigenstates.
enum class Target { Up, Down };

inline Vec2 target_ket(Target t) { return t == Target::Up ? kKetUp : kKetDown; }

// Builds the 24-element group and verifies distinctness and closure.
// Throws InternalError on any violation (would indicate a transcription
// bug in the table).
inline CliffordGroup build_clifford_group() {
    CliffordGroup group;
    for (int i = 0; i < CliffordGroup::kSize; ++i) {
        CliffordElement& e = group.elements_[i];
        e.index = i + 1;
        e.decomposition = detail::clifford_table()[i];
        e.unitary = canonicalize(decomposition_unitary(e.decomposition));
        if (!is_unitary(e.unitary)) throw InternalError("Clifford element is not unitary");
    }
    for (int a = 1; a <= CliffordGroup::kSize; ++a) {
        for (int b = a + 1; b <= CliffordGroup::kSize; ++b) {
            if (max_abs_diff(group.element(a).unitary, group.element(b).unitary) <
                kCliffordMatchTol) {
                throw InternalError("Clifford elements " + std::to_string(a) + " and " +
                                    std::to_string(b) + " coincide");
            }
        }
    }
    for (int a = 1; a <= CliffordGroup::kSize; ++a) {
        for (int b = 1; b <= CliffordGroup::kSize; ++b) {
            group.compose(a, b);  // throws if the product leaves the group
        }
    }
    return group;
}

// Net unitary of a whole index sequence (applied first to last).
inline Mat2 sequence_unitary(const CliffordGroup& group, const std::vector<int>& indices) {
    Mat2 u = kIdentity;
    for (int idx : indices) u = group.element(idx).unitary * u;
    return u;
}

// Final Clifford that maps the sequence output (for input |down>) onto
// the requested sigma_z eigenstate.  A qualifying element always exists;
// ties are broken towards the lowest table index.
inline const CliffordElement& recovery_gate(const CliffordGroup& group,
                                            const std::vector<int>& sequence, Target target) {
    if (sequence.empty()) throw InternalError("recovery_gate: empty sequence");
    const Vec2 reached = sequence_unitary(group, sequence) * kKetDown;
    const Vec2 want = target_ket(target);
    for (const CliffordElement& e : group.elements()) {
        const cplx overlap = want.dot(e.unitary * reached);
        if (std::norm(overlap) > 1.0 - 1e-9) return e;
    }
    throw InternalError("recovery_gate: no Clifford maps the sequence output to the target");
}

}  // namespace spinrb
