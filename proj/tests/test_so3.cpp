#include "hinav/so3.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hinav;

namespace {

std::mt19937 rng(12345);

Vec3 random_vec(double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return Vec3(d(rng), d(rng), d(rng));
}

Mat3 random_rotation() { return so3::exp(random_vec(M_PI)); }

Mat3 random_psd() {
  Mat3 A;
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = d(rng);
  return A * A.transpose();
}

} // namespace

TEST(So3, HatBasics) {
  Mat3 expected;
  expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_TRUE(so3::hat(Vec3(1, 0, 0)).isApprox(expected, 1e-15));
  EXPECT_TRUE(so3::hat(Vec3::Zero()).isZero(0.0));

  const Vec3 v(1, 2, 3);
  EXPECT_LT((so3::hat(v) * v).norm(), 1e-15);
  const Vec3 w = random_vec();
  EXPECT_LT((so3::hat(v) * w - v.cross(w)).norm(), 1e-15);
}

TEST(So3, VeeRoundtripAndErrors) {
  const Vec3 v(1, 2, 3);
  EXPECT_EQ(so3::vee(so3::hat(v)), v); // exact: same stored components
  EXPECT_EQ(so3::vee(Mat3::Zero()), Vec3::Zero());
  EXPECT_THROW(so3::vee(Mat3::Identity()), NotAntisymmetric);
}

TEST(So3, PsiDefinition) {
  const Vec3 u(1, 2, 3);
  EXPECT_LT((so3::psi(so3::hat(u)) - u).norm(), 1e-15);
  EXPECT_LT(so3::psi(random_psd()).norm(), 1e-15);
}

TEST(So3, PsiTraceIdentity) {
  // tr(A hat(u)) = -2 u^T psi(A)
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    Mat3 A;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = d(rng);
    const Vec3 u = random_vec(2.0);
    const double lhs = (A * so3::hat(u)).trace();
    const double rhs = -2.0 * u.dot(so3::psi(A));
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(So3, PsiMatchesWeightedCrossSum) {
  // psi(M R) = -1/2 sum k_i hat(p_i - p_c) R^T (p_i - p_c)
  // for M = sum k_i (p_i - p_c)(p_i - p_c)^T; unit-axis landmark field.
  const std::vector<Vec3> p = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  const double k = 1.0 / 3.0;
  Vec3 p_c = Vec3::Zero();
  for (const auto& pi : p) p_c += k * pi;
  Mat3 M = Mat3::Zero();
  for (const auto& pi : p) M += k * (pi - p_c) * (pi - p_c).transpose();

  const Mat3 R = so3::angle_axis(0.3, Vec3(1, 0, 0));
  Vec3 brute = Vec3::Zero();
  for (const auto& pi : p) {
    brute += -0.5 * k * so3::hat(pi - p_c) * (R.transpose() * (pi - p_c));
  }
  EXPECT_LT((so3::psi(M * R) - brute).norm(), 1e-14);
}

TEST(So3, ExpBasics) {
  EXPECT_TRUE(so3::exp(Vec3::Zero()).isIdentity(0.0));
  const Mat3 R = so3::exp(0.5 * M_PI * Vec3(0, 0, 1));
  EXPECT_LT((R * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm(), 1e-12);

  const Vec3 tiny = 1e-12 * Vec3(1, -2, 0.5).normalized();
  EXPECT_LT((so3::exp(tiny) - (Mat3::Identity() + so3::hat(tiny))).norm(),
            1e-20);
}

TEST(So3, ExpOrthonormalityDrift) {
  for (int k = 0; k < 200; ++k) {
    const Mat3 R = so3::exp(random_vec(3.0));
    EXPECT_LT(so3::orthonormality_error(R), 1e-12);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
  }
}

TEST(So3, AngleAxis) {
  EXPECT_TRUE(so3::angle_axis(0.0, Vec3(1, 0, 0)).isIdentity(1e-15));
  EXPECT_TRUE(so3::angle_axis(M_PI, Vec3(1, 0, 0))
                  .isApprox(Vec3(1, -1, -1).asDiagonal().toDenseMatrix(),
                            1e-12));
  const Vec3 u = Vec3(1, 1, 1).normalized();
  const Mat3 R = so3::angle_axis(0.1 * M_PI, u);
  EXPECT_LT(so3::orthonormality_error(R), 1e-12);
  EXPECT_LT((R - so3::exp(0.1 * M_PI * u)).norm(), 1e-14);
  EXPECT_THROW(so3::angle_axis(0.3, Vec3(1, 1, 0)), NotUnitAxis);
}

TEST(So3, DistIdentity) {
  EXPECT_DOUBLE_EQ(so3::dist_identity(Mat3::Identity()), 0.0);
  for (int k = 0; k < 10; ++k) {
    const Vec3 u = random_vec().normalized();
    EXPECT_NEAR(so3::dist_identity(so3::angle_axis(M_PI, u)), 1.0, 1e-12);
  }
  EXPECT_NEAR(so3::dist_identity(so3::angle_axis(0.6, Vec3(0, 1, 0))),
              std::abs(std::sin(0.3)), 1e-12);
  // |R_a(theta, u)|_I = |sin(theta/2)| over the full range
  for (int k = 0; k <= 50; ++k) {
    const double theta = M_PI * double(k) / 50.0;
    const Vec3 u = random_vec().normalized();
    EXPECT_NEAR(so3::dist_identity(so3::angle_axis(theta, u)),
                std::abs(std::sin(0.5 * theta)), 1e-10);
  }
}

TEST(So3, EMatrixBasics) {
  EXPECT_TRUE(so3::e_matrix(Mat3::Identity(), Mat3::Identity())
                  .isIdentity(1e-15));
  const Mat3 M = random_psd();
  EXPECT_LT((so3::e_matrix(M, Mat3::Identity()) - so3::mbar(M)).norm(), 1e-14);
}

TEST(So3, EMatrixDerivativeOracle) {
  // d/dt psi(M R(t)) = E(M, R) omega along Rdot = R hat(omega),
  // central differences with dt = 1e-6.
  const Mat3 M = random_psd();
  const Mat3 R = random_rotation();
  const Vec3 omega = random_vec(2.0);
  const double h = 1e-6;
  const Vec3 fwd = so3::psi(M * (R * so3::exp(omega * h)));
  const Vec3 bwd = so3::psi(M * (R * so3::exp(-omega * h)));
  const Vec3 numeric = (fwd - bwd) / (2.0 * h);
  const Vec3 analytic = so3::e_matrix(M, R) * omega;
  EXPECT_LT((numeric - analytic).norm(), 1e-8 * (1.0 + analytic.norm()));
}

TEST(So3, EMatrixNormBound) {
  for (int k = 0; k < 50; ++k) {
    const Mat3 M = random_psd();
    const Mat3 R = random_rotation();
    EXPECT_LE(so3::e_matrix(M, R).norm(), so3::mbar(M).norm() + 1e-12);
  }
}

TEST(So3, TraceInequalityOracle) {
  // 4 lam_min(Mbar) |R|^2 <= tr((I - R) M) <= 4 lam_max(Mbar) |R|^2
  for (int k = 0; k < 100; ++k) {
    const Mat3 M = random_psd();
    const Mat3 R = random_rotation();
    Eigen::SelfAdjointEigenSolver<Mat3> es(so3::mbar(M));
    const double r2 = std::pow(so3::dist_identity(R), 2);
    const double mid = ((Mat3::Identity() - R) * M).trace();
    EXPECT_GE(mid, 4.0 * es.eigenvalues()(0) * r2 - 1e-9);
    EXPECT_LE(mid, 4.0 * es.eigenvalues()(2) * r2 + 1e-9);
  }
}

TEST(So3, PsiNormOracle) {
  // ||psi(M R)||^2 <= tr((I - R) W') with W' = tr(Mbar^2) I - 2 Mbar^2,
  // with equality in the small-angle limit.
  std::vector<Mat3> fields;
  fields.push_back(random_psd());
  {
    // planar landmark second moment similar to the benchmark setup
    Mat3 M = Mat3::Zero();
    M(0, 0) = M(1, 1) = 33.0;
    fields.push_back(M);
  }
  for (const Mat3& M : fields) {
    const Mat3 Mb = so3::mbar(M);
    const Mat3 Wp =
        (Mb * Mb).trace() * Mat3::Identity() - 2.0 * Mb * Mb;
    for (int k = 0; k < 100; ++k) {
      const Mat3 R = random_rotation();
      const double lhs = so3::psi(M * R).squaredNorm();
      const double rhs = ((Mat3::Identity() - R) * Wp).trace();
      EXPECT_LE(lhs, rhs + 1e-9 * (1.0 + std::abs(rhs)));
    }
    // small-angle equality
    const Vec3 u = random_vec().normalized();
    const Mat3 R = so3::angle_axis(1e-4, u);
    const double lhs = so3::psi(M * R).squaredNorm();
    const double rhs = ((Mat3::Identity() - R) * Wp).trace();
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-6);
  }
}

TEST(So3, Project) {
  const Mat3 R = random_rotation();
  Mat3 noisy = R;
  noisy(0, 1) += 1e-6;
  noisy(2, 0) -= 2e-6;
  const Mat3 P = so3::project(noisy);
  EXPECT_LT(so3::orthonormality_error(P), 1e-14);
  EXPECT_NEAR(P.determinant(), 1.0, 1e-12);
  EXPECT_LT((P - R).norm(), 1e-5);
  EXPECT_LT((so3::project(R) - R).norm(), 1e-14);
}
