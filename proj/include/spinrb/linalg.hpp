#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

// 2x2 complex linear algebra helpers shared by the gate and pulse code.
// Basis convention throughout the library: index 0 = |up> (sigma_z = +1),
// index 1 = |down>.  The qubit is initialised in |down>.

namespace spinrb {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline const Mat2 kIdentity = Mat2::Identity();

inline Mat2 make_mat2(cplx a, cplx b, cplx c, cplx d) {
    Mat2 m;
    m << a, b, c, d;
    return m;
}

inline const Mat2 kSigmaX = make_mat2(0, 1, 1, 0);
inline const Mat2 kSigmaY = make_mat2(0, cplx(0, -1), cplx(0, 1), 0);
inline const Mat2 kSigmaZ = make_mat2(1, 0, 0, -1);

inline const Vec2 kKetUp = (Vec2() << 1, 0).finished();
inline const Vec2 kKetDown = (Vec2() << 0, 1).finished();

// exp(-i angle (n . sigma) / 2) for a unit axis n.
inline Mat2 rotation(double nx, double ny, double nz, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    return make_mat2(cplx(c, -s * nz), cplx(-s * ny, -s * nx),
                     cplx(s * ny, -s * nx), cplx(c, s * nz));
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// Fixes the global phase so the first row-major entry with magnitude
// above 1e-12 is real and non-negative.  Idempotent bit-for-bit: an
// already-canonical matrix is returned unchanged.
inline Mat2 canonicalize(const Mat2& u) {
    constexpr double kZeroThreshold = 1e-12;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const cplx pivot = u(r, c);
            const double mag = std::abs(pivot);
            if (mag <= kZeroThreshold) continue;
            if (pivot.imag() == 0.0 && pivot.real() >= 0.0) return u;
            Mat2 fixed = u * (std::conj(pivot) / mag);
            fixed(r, c) = mag;  // exactly real, so a second pass is a no-op
            return fixed;
        }
    }
    return u;  // numerically zero matrix; nothing to fix
}

inline bool is_unitary(const Mat2& u, double tol = 1e-12) {
    return max_abs_diff(u.adjoint() * u, kIdentity) < tol;
}

}  // namespace spinrb
