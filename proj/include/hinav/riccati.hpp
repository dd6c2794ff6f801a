#pragma once

#include <vector>

#include "hinav/types.hpp"

namespace hinav {

/// Symmetric positive definite Riccati matrix, 6x6 (known gravity) or
/// 9x9 (estimated gravity).
struct RiccatiState {
  MatX P;
  int dim = 6;

  static RiccatiState identity(int dim, double scale = 1.0);
};

/// Measurement-noise model used to derive V and Q from sensor covariances.
struct NoiseModel {
  Mat3 cov_omega = Mat3::Zero();
  Mat3 cov_accel = Mat3::Zero();
  std::vector<Mat3> cov_landmark; ///< per landmark; broadcast if size 1
  double floor_v = 1e-9;          ///< added to V to keep it uniformly PD

  Mat3 landmark_cov(std::size_t i) const;
};

/// Flow matrix: block bidiagonal with -hat(omega) on the diagonal and I3
/// on the superdiagonal. dim is 6 or 9.
MatX a_matrix(const Vec3& omega, int dim);

/// Output matrix C = [I3 0 ...] for the given dimension.
MatX c_matrix(int dim);

/// Advances P along Pdot = A P + P A^T + V for one step of length dt
/// (RK4, symmetrized). Throws LostPositivity if the result is not PD.
RiccatiState flow_P(const RiccatiState& state, const Vec3& omega, const MatX& V,
                    double dt);

/// Same flow with an explicit A matrix (testing seam).
RiccatiState flow_P_with(const RiccatiState& state, const MatX& A, const MatX& V,
                         double dt);

/// Measurement update P+ = P - P C^T (C P C^T + Q)^-1 C P. Returns the
/// updated state and the gain K = P C^T (C P C^T + Q)^-1.
std::pair<RiccatiState, MatX> update_P(const RiccatiState& state, const Mat3& Q);

/// Noise-adapted (V, Q):
///   V = G blkdiag(cov_omega, cov_accel) G^T + floor_v I
///   Q = sum_i k_i^2 R cov_y_i R^T
/// with G rows [hat(R^T (p - p_c)) 0; hat(R^T v) I3] and, for dim 9, an
/// extra row [hat(R^T g) 0].
std::pair<MatX, Mat3> adapt_noise(const Mat3& R_hat, const Vec3& p_hat,
                                  const Vec3& v_hat, const Vec3& g_hat,
                                  const Vec3& p_c,
                                  const std::vector<double>& weights,
                                  const NoiseModel& model, int dim);

/// Per-run log consumed by the Gramian diagnostics.
struct RiccatiLog {
  int dim = 6;
  std::vector<double> step_t;   ///< grid times, strictly increasing
  std::vector<Vec3> step_omega; ///< omega over [t_k, t_k+1] (zero-order hold)
  std::vector<MatX> step_V;     ///< V over the same interval
  std::vector<std::size_t> event_step; ///< measurement events (grid index)
  std::vector<Mat3> event_Q;
};

/// Empirical observability/controllability bounds over sliding windows of
/// `gamma` inter-event intervals:
///   mu_phi: min eig of Phi^T Phi across consecutive events,
///   mu_v / mu_V: extremal eigs of int Phi V Phi^T ds,
///   mu_q / mu_Q: extremal eigs of sum Phi^T C^T Q^-1 C Phi.
struct GramianReport {
  int gamma = 0;
  int windows = 0;
  double mu_phi = 0.0;
  double mu_v = 0.0;
  double mu_V = 0.0;
  double mu_q = 0.0;
  double mu_Q = 0.0;
};

/// Throws WindowTooShort unless the log covers at least gamma+1 events.
GramianReport gramian_diagnostics(const RiccatiLog& log, int gamma);

/// Default diagnostics window: smallest gamma reaching full observability
/// rank plus one (2 for dim 6, 3 for dim 9).
int default_gamma(int dim);

} // namespace hinav
