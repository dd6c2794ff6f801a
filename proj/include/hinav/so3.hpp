#pragma once

#include "hinav/types.hpp"

namespace hinav::so3 {

/// Cross-product (skew-symmetric) matrix: hat(v) * w == v x w.
Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws NotAntisymmetric if ||A + A^T||_F > 1e-6.
Vec3 vee(const Mat3& A);

/// Vector extraction of the antisymmetric part:
/// psi(A) = 0.5 * [a32 - a23, a13 - a31, a21 - a12]^T,
/// so that tr(A * hat(u)) = -2 u^T psi(A) for every u.
Vec3 psi(const Mat3& A);

/// Exponential map so(3) -> SO(3), Rodrigues formula with a Taylor
/// branch below 1e-8 to avoid 0/0 near the identity.
Mat3 exp(const Vec3& v);

/// Angle-axis rotation R = I + sin(theta) u^x + (1 - cos(theta)) (u^x)^2.
/// Throws NotUnitAxis unless ||u|| == 1 within 1e-9.
Mat3 angle_axis(double theta, const Vec3& axis);

/// Normalized distance from the identity, |R|_I = sqrt(tr(I - R) / 4),
/// clamped to [0, 1]. Equals |sin(theta/2)| for a rotation by theta.
double dist_identity(const Mat3& R);

/// E(M, R) = 0.5 * (tr(M R) I - R^T M). Along Rdot = R hat(w) it satisfies
/// d/dt psi(M R) = E(M, R) w, and ||E(M, R)||_F <= ||mbar(M)||_F.
Mat3 e_matrix(const Mat3& M, const Mat3& R);

/// Mbar = 0.5 * (tr(M) I - M).
Mat3 mbar(const Mat3& M);

/// Frobenius deviation of R from orthonormality, ||R^T R - I||_F.
double orthonormality_error(const Mat3& R);

/// Nearest rotation matrix in the Frobenius sense (polar projection).
Mat3 project(const Mat3& A);

/// True if R satisfies the rotation-matrix invariants within tol.
bool is_rotation(const Mat3& R, double tol = 1e-9);

} // namespace hinav::so3
