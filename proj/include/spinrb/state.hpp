#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "spinrb/linalg.hpp"

namespace spinrb {

// Single spin-1/2 density matrix.  Valid states are Hermitian, unit
// trace and positive semidefinite within 1e-10.
class QubitState {
public:
    QubitState() : rho_(kKetDown * kKetDown.adjoint()) {}
    explicit QubitState(const Mat2& rho) : rho_(rho) {}

    static QubitState down() { return QubitState(); }
    static QubitState up() { return QubitState(kKetUp * kKetUp.adjoint()); }
    static QubitState pure(const Vec2& ket) {
        const double n = ket.norm();
        return QubitState((ket / n) * (ket / n).adjoint());
    }
    static QubitState maximally_mixed() { return QubitState(0.5 * kIdentity); }

    const Mat2& rho() const { return rho_; }

    double population_up() const { return rho_(0, 0).real(); }
    double purity() const { return (rho_ * rho_).trace().real(); }

    void apply_unitary(const Mat2& u) { rho_ = u * rho_ * u.adjoint(); }

    // rho -> (1-p) rho + p I/2.
    void apply_depolarizing(double p) {
        if (p < 0.0 || p >= 1.0) throw std::domain_error("depolarizing probability must be in [0,1)");
        rho_ = (1.0 - p) * rho_ + (p / 2.0) * kIdentity;
    }

    // Multiplies the coherences by the given factor in (0, 1]; models
    // pure dephasing over an idle interval.
    void apply_dephasing(double factor) {
        rho_(0, 1) *= factor;
        rho_(1, 0) *= factor;
    }

    bool is_valid(double tol = 1e-10) const {
        if (std::abs(rho_(0, 0).imag()) > tol || std::abs(rho_(1, 1).imag()) > tol) return false;
        if (std::abs(rho_(0, 1) - std::conj(rho_(1, 0))) > tol) return false;
        if (std::abs(rho_.trace().real() - 1.0) > tol) return false;
        // Eigenvalues of a Hermitian 2x2: tr/2 +- sqrt((a-d)^2/4 + |b|^2).
        const double a = rho_(0, 0).real(), d = rho_(1, 1).real();
        const double half_gap = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(rho_(0, 1)));
        return 0.5 * (a + d) - half_gap >= -tol;
    }

    void validate() const {
        if (!is_valid()) throw std::invalid_argument("invalid qubit state (not a density matrix)");
    }

private:
    Mat2 rho_;
};

namespace detail {

// Square root of a Hermitian PSD 2x2 matrix; small negative eigenvalues
// from rounding are clamped to zero.
inline Mat2 psd_sqrt(const Mat2& m) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(m);
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// State fidelity F = (tr sqrt( sqrt(rho) sigma sqrt(rho) ))^2.  For a
// pure ideal state this reduces to the overlap <psi|rho|psi>.
inline double state_fidelity(const QubitState& actual, const QubitState& ideal) {
    actual.validate();
    ideal.validate();
    const Mat2 sq = detail::psd_sqrt(actual.rho());
    Eigen::SelfAdjointEigenSolver<Mat2> es(sq * ideal.rho() * sq);
    const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.cwiseSqrt().sum();
    return tr * tr;
}

}  // namespace spinrb
