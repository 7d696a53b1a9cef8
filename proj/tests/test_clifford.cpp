#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <vector>

#include "spinrb/clifford.hpp"
#include "spinrb/rng.hpp"
#include "spinrb/state.hpp"

using namespace spinrb;

namespace {

// Brute-force search over all 24 candidates by plain matrix
// multiplication; deliberately independent of CliffordGroup::compose's
// lookup path.
int oracle_compose(const CliffordGroup& g, int a, int b) {
    const Mat2 u = canonicalize(g.element(b).unitary * g.element(a).unitary);
    for (int i = 1; i <= 24; ++i) {
        if (max_abs_diff(g.element(i).unitary, u) < 1e-9) return i;
    }
    return -1;
}

// Lowest-index element mapping the state reached from |down> onto the
// target eigenstate, found by direct state propagation.
int oracle_recovery(const CliffordGroup& g, const std::vector<int>& seq, Target target) {
    Vec2 v = kKetDown;
    for (int idx : seq) v = g.element(idx).unitary * v;
    for (int i = 1; i <= 24; ++i) {
        const Vec2 w = g.element(i).unitary * v;
        if (std::norm(target_ket(target).dot(w)) > 1.0 - 1e-9) return i;
    }
    return -1;
}

bool bitwise_equal(const Mat2& a, const Mat2& b) {
    return std::memcmp(a.data(), b.data(), sizeof(cplx) * 4) == 0;
}

}  // namespace

TEST_CASE("Pauli operators", "[clifford]") {
    for (const Mat2& s : {kSigmaX, kSigmaY, kSigmaZ}) {
        CHECK(max_abs_diff(s * s, kIdentity) == 0.0);
        CHECK(max_abs_diff(s, s.adjoint()) == 0.0);
        CHECK(std::abs(s.trace()) == 0.0);
    }
    CHECK(max_abs_diff(kSigmaX * kSigmaY, cplx(0, 1) * kSigmaZ) == 0.0);
    CHECK(max_abs_diff(kSigmaY * kSigmaZ, cplx(0, 1) * kSigmaX) == 0.0);
    CHECK(max_abs_diff(kSigmaZ * kSigmaX, cplx(0, 1) * kSigmaY) == 0.0);
}

TEST_CASE("physical gate unitaries", "[clifford]") {
    CHECK(max_abs_diff(gate_unitary(PhysicalGate::Identity), kIdentity) == 0.0);
    CHECK(max_abs_diff(gate_unitary(PhysicalGate::X), cplx(0, -1) * kSigmaX) < 1e-15);
    CHECK(max_abs_diff(gate_unitary(PhysicalGate::Y), cplx(0, -1) * kSigmaY) < 1e-15);
    // -X/2 undoes X/2
    CHECK(max_abs_diff(gate_unitary(PhysicalGate::XHalf) * gate_unitary(PhysicalGate::XHalfMinus),
                       kIdentity) < 1e-15);
    CHECK(max_abs_diff(gate_unitary(PhysicalGate::YHalf) * gate_unitary(PhysicalGate::YHalfMinus),
                       kIdentity) < 1e-15);
    for (PhysicalGate g : kAllPhysicalGates) {
        CHECK(is_unitary(gate_unitary(g)));
        CHECK(parse_gate(gate_label(g)) == g);
    }
    CHECK_THROWS_AS(parse_gate("Z"), ConfigError);
}

TEST_CASE("group builds with the tabulated decompositions", "[clifford]") {
    const CliffordGroup group = build_clifford_group();
    REQUIRE(group.elements().size() == 24);

    CHECK(group.element(4).decomposition == std::vector<PhysicalGate>{PhysicalGate::X});
    CHECK(group.element(2).decomposition ==
          std::vector<PhysicalGate>{PhysicalGate::YHalf, PhysicalGate::XHalf});
    CHECK(max_abs_diff(group.element(1).unitary, kIdentity) == 0.0);

    CHECK(group.mean_physical_gates() == 1.875);

    for (const CliffordElement& e : group.elements()) {
        CHECK(is_unitary(e.unitary));
        // canonical phase: leading entry real and non-negative
        CHECK(bitwise_equal(canonicalize(e.unitary), e.unitary));
    }
}

TEST_CASE("closure and inverses, exhaustively", "[clifford]") {
    const CliffordGroup group = build_clifford_group();
    for (int a = 1; a <= 24; ++a) {
        bool has_inverse = false;
        for (int b = 1; b <= 24; ++b) {
            const int composed = group.compose(a, b).index;
            CHECK(composed == oracle_compose(group, a, b));
            if (composed == 1) has_inverse = true;
        }
        CHECK(has_inverse);
        CHECK(group.compose(a, group.inverse(a).index).index == 1);
    }
}

TEST_CASE("compose identities", "[clifford]") {
    const CliffordGroup group = build_clifford_group();
    for (int k = 1; k <= 24; ++k) CHECK(group.compose(1, k).index == k);
    CHECK(group.compose(4, 4).index == 1);  // X then X is the identity up to phase
    CHECK(group.compose(2, 3).index == oracle_compose(group, 2, 3));
}

TEST_CASE("recovery gate", "[clifford]") {
    const CliffordGroup group = build_clifford_group();

    CHECK(recovery_gate(group, {1}, Target::Down).index == 1);
    CHECK(recovery_gate(group, {4}, Target::Down).index == oracle_recovery(group, {4}, Target::Down));
    CHECK(recovery_gate(group, {2, 3}, Target::Up).index ==
          oracle_recovery(group, {2, 3}, Target::Up));

    // lowest-index tie break
    for (int a = 1; a <= 24; ++a) {
        for (Target t : {Target::Up, Target::Down}) {
            CHECK(recovery_gate(group, {a}, t).index == oracle_recovery(group, {a}, t));
        }
    }
}

TEST_CASE("recovery correctness over random sequences", "[clifford]") {
    const CliffordGroup group = build_clifford_group();
    SplitRng rng = make_stream(20250810, 0x7265636f76657279ull);
    for (int trial = 0; trial < 1000; ++trial) {
        const int len = 1 + rng.uniform_int(50);
        std::vector<int> seq(len);
        for (int& idx : seq) idx = 1 + rng.uniform_int(24);
        const Target target = rng.uniform() < 0.5 ? Target::Up : Target::Down;
        seq.push_back(recovery_gate(group, seq, target).index);

        QubitState state = QubitState::down();
        state.apply_unitary(sequence_unitary(group, seq));
        const QubitState want = target == Target::Up ? QubitState::up() : QubitState::down();
        REQUIRE(state_fidelity(state, want) > 1.0 - 1e-9);
    }
}

TEST_CASE("canonicalization is idempotent bit-for-bit", "[clifford]") {
    const CliffordGroup group = build_clifford_group();
    SplitRng rng = make_stream(42, 0x63616e6f6eull);
    for (int trial = 0; trial < 200; ++trial) {
        Mat2 u = rotation(0, 0, 1, rng.uniform() * 2 * kPi) *
                 rotation(0, 1, 0, rng.uniform() * 2 * kPi) *
                 rotation(1, 0, 0, rng.uniform() * 2 * kPi);
        if (trial % 3 == 0) u = group.element(1 + rng.uniform_int(24)).unitary * u;
        const Mat2 once = canonicalize(u);
        const Mat2 twice = canonicalize(once);
        REQUIRE(bitwise_equal(once, twice));
        CHECK(is_unitary(once));
    }
    // negative-real pivot stays exact
    const Mat2 flipped = canonicalize(-kIdentity);
    CHECK(bitwise_equal(canonicalize(flipped), flipped));
    CHECK(flipped(0, 0).real() >= 0.0);
}

TEST_CASE("single-gate Clifford lookup", "[clifford]") {
    const CliffordGroup group = build_clifford_group();
    CHECK(group.single_gate_element(PhysicalGate::Identity).index == 1);
    CHECK(group.single_gate_element(PhysicalGate::X).index == 4);
    CHECK(group.single_gate_element(PhysicalGate::Y).index == 7);
    CHECK(group.single_gate_element(PhysicalGate::XHalfMinus).index == 14);
    CHECK(group.single_gate_element(PhysicalGate::YHalfMinus).index == 16);
    CHECK(group.single_gate_element(PhysicalGate::XHalf).index == 17);
    CHECK(group.single_gate_element(PhysicalGate::YHalf).index == 22);
}
