#include "hinav/so3.hpp"

#include <cmath>

namespace hinav::so3 {

Mat3 hat(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& A) {
  if ((A + A.transpose()).norm() > 1e-6) {
    throw NotAntisymmetric("vee: input is not antisymmetric");
  }
  return Vec3(A(2, 1), A(0, 2), A(1, 0));
}

Vec3 psi(const Mat3& A) {
  return 0.5 * Vec3(A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1));
}

Mat3 exp(const Vec3& v) {
  const double theta = v.norm();
  const Mat3 V = hat(v);
  if (theta < 1e-8) {
    // sin(t)/t ~ 1 - t^2/6, (1-cos(t))/t^2 ~ 1/2 - t^2/24
    const double t2 = theta * theta;
    return Mat3::Identity() + (1.0 - t2 / 6.0) * V + (0.5 - t2 / 24.0) * V * V;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * V + b * V * V;
}

Mat3 angle_axis(double theta, const Vec3& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw NotUnitAxis("angle_axis: axis must be a unit vector");
  }
  const Mat3 U = hat(axis);
  return Mat3::Identity() + std::sin(theta) * U + (1.0 - std::cos(theta)) * U * U;
}

double dist_identity(const Mat3& R) {
  const double s = 0.25 * (3.0 - R.trace());
  return std::sqrt(std::min(1.0, std::max(0.0, s)));
}

Mat3 e_matrix(const Mat3& M, const Mat3& R) {
  return 0.5 * ((M * R).trace() * Mat3::Identity() - R.transpose() * M);
}

Mat3 mbar(const Mat3& M) {
  return 0.5 * (M.trace() * Mat3::Identity() - M);
}

double orthonormality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

Mat3 project(const Mat3& A) {
  Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  const double d = (U * V.transpose()).determinant();
  return U * Vec3(1.0, 1.0, d < 0.0 ? -1.0 : 1.0).asDiagonal() * V.transpose();
}

bool is_rotation(const Mat3& R, double tol) {
  return orthonormality_error(R) <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

} // namespace hinav::so3
