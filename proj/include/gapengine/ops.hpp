// ops.hpp — 2x2 operator helpers for the two-level working medium
//
// Basis ordering throughout: index 0 = ground state |0>, index 1 = excited |1>.
// sigma_+ sigma_- = |1><1|, so H0(t) = diag(0, omega(t)).

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace gapengine {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

inline constexpr cplx I_UNIT{0.0, 1.0};

namespace ops {

inline Mat2 sigma_x() {
    Mat2 m;
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

// sigma_y consistent with sigma_+ = (sigma_x + i sigma_y)/2 = |1><0|.
inline Mat2 sigma_y() {
    Mat2 m;
    m << cplx(0.0, 0.0), cplx(0.0, 1.0),
         cplx(0.0, -1.0), cplx(0.0, 0.0);
    return m;
}

// sigma_z = 2 sigma_+ sigma_- - 1
inline Mat2 sigma_z() {
    Mat2 m;
    m << -1.0, 0.0,
          0.0, 1.0;
    return m;
}

inline Mat2 excited_projector() {
    Mat2 m = Mat2::Zero();
    m(1, 1) = 1.0;
    return m;
}

inline Mat2 ground_state() {
    Mat2 m = Mat2::Zero();
    m(0, 0) = 1.0;
    return m;
}

inline Mat2 excited_state() { return excited_projector(); }

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const Mat2& m) { return max_abs(m - m.adjoint()); }

} // namespace ops
} // namespace gapengine
