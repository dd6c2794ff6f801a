#include "hinav/riccati.hpp"

#include <cmath>

#include "hinav/so3.hpp"

namespace hinav {
namespace {

void check_dim(int dim) {
  if (dim != 6 && dim != 9) throw Error("riccati: dim must be 6 or 9");
}

MatX symmetrize(const MatX& P) { return 0.5 * (P + P.transpose()); }

double min_eig(const MatX& S) {
  Eigen::SelfAdjointEigenSolver<MatX> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

} // namespace

RiccatiState RiccatiState::identity(int dim, double scale) {
  check_dim(dim);
  return RiccatiState{scale * MatX::Identity(dim, dim), dim};
}

Mat3 NoiseModel::landmark_cov(std::size_t i) const {
  if (cov_landmark.empty()) return Mat3::Zero();
  if (cov_landmark.size() == 1) return cov_landmark[0];
  return cov_landmark.at(i);
}

MatX a_matrix(const Vec3& omega, int dim) {
  check_dim(dim);
  MatX A = MatX::Zero(dim, dim);
  const Mat3 W = so3::hat(omega);
  for (int b = 0; b * 3 < dim; ++b) {
    A.block<3, 3>(3 * b, 3 * b) = -W;
    if (3 * (b + 1) < dim) {
      A.block<3, 3>(3 * b, 3 * (b + 1)) = Mat3::Identity();
    }
  }
  return A;
}

MatX c_matrix(int dim) {
  check_dim(dim);
  MatX C = MatX::Zero(3, dim);
  C.block<3, 3>(0, 0) = Mat3::Identity();
  return C;
}

RiccatiState flow_P_with(const RiccatiState& state, const MatX& A, const MatX& V,
                         double dt) {
  if (!(dt > 0.0)) throw InvalidDt("flow_P: dt must be > 0");
  const auto rhs = [&](const MatX& P) -> MatX {
    return A * P + P * A.transpose() + V;
  };
  const MatX& P = state.P;
  const MatX k1 = rhs(P);
  const MatX k2 = rhs(P + 0.5 * dt * k1);
  const MatX k3 = rhs(P + 0.5 * dt * k2);
  const MatX k4 = rhs(P + dt * k3);
  RiccatiState next{symmetrize(P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)),
                    state.dim};
  if (min_eig(next.P) <= 0.0) {
    throw LostPositivity("flow_P: P lost positive definiteness (dt too large?)");
  }
  return next;
}

RiccatiState flow_P(const RiccatiState& state, const Vec3& omega, const MatX& V,
                    double dt) {
  return flow_P_with(state, a_matrix(omega, state.dim), V, dt);
}

std::pair<RiccatiState, MatX> update_P(const RiccatiState& state, const Mat3& Q) {
  const int dim = state.dim;
  const MatX PCt = state.P.leftCols(3); // P C^T with C = [I 0 ...]
  const Mat3 S = state.P.topLeftCorner(3, 3) + Q;
  Eigen::LLT<Mat3> llt(S);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovationCovariance("update_P: C P C^T + Q not invertible");
  }
  const MatX K = llt.solve(PCt.transpose()).transpose(); // dim x 3
  RiccatiState next{symmetrize(state.P - K * PCt.transpose()), dim};
  return {next, K};
}

std::pair<MatX, Mat3> adapt_noise(const Mat3& R_hat, const Vec3& p_hat,
                                  const Vec3& v_hat, const Vec3& g_hat,
                                  const Vec3& p_c,
                                  const std::vector<double>& weights,
                                  const NoiseModel& model, int dim) {
  check_dim(dim);
  const Mat3 Rt = R_hat.transpose();
  MatX G = MatX::Zero(dim, 6);
  G.block<3, 3>(0, 0) = so3::hat(Rt * (p_hat - p_c));
  G.block<3, 3>(3, 0) = so3::hat(Rt * v_hat);
  G.block<3, 3>(3, 3) = Mat3::Identity();
  if (dim == 9) {
    G.block<3, 3>(6, 0) = so3::hat(Rt * g_hat);
  }
  MatX cov = MatX::Zero(6, 6);
  cov.topLeftCorner(3, 3) = model.cov_omega;
  cov.bottomRightCorner(3, 3) = model.cov_accel;
  const MatX V =
      G * cov * G.transpose() + model.floor_v * MatX::Identity(dim, dim);

  Mat3 Q = Mat3::Zero();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Q += weights[i] * weights[i] * R_hat * model.landmark_cov(i) * Rt;
  }
  return {V, Q};
}

int default_gamma(int dim) {
  check_dim(dim);
  return dim == 6 ? 2 : 3;
}

GramianReport gramian_diagnostics(const RiccatiLog& log, int gamma) {
  check_dim(log.dim);
  if (gamma < 1) throw Error("gramian_diagnostics: gamma must be >= 1");
  const std::size_t n_events = log.event_step.size();
  if (n_events < static_cast<std::size_t>(gamma) + 1) {
    throw WindowTooShort("gramian_diagnostics: need at least gamma+1 events");
  }
  if (log.step_t.size() < 2 || log.step_omega.size() + 1 != log.step_t.size() ||
      log.step_V.size() + 1 != log.step_t.size()) {
    throw Error("gramian_diagnostics: inconsistent log");
  }

  const int dim = log.dim;
  const MatX C = c_matrix(dim);
  GramianReport rep;
  rep.gamma = gamma;
  rep.mu_phi = rep.mu_v = rep.mu_q = std::numeric_limits<double>::infinity();
  rep.mu_V = rep.mu_Q = 0.0;

  for (std::size_t j = gamma; j < n_events; ++j) {
    const std::size_t k0 = log.event_step[j - gamma];
    const std::size_t k1 = log.event_step[j];

    // Integrate Phi (transition from the window start) and the forced
    // Lyapunov equation Gdot = A G + G A^T + V, G(t0) = 0, which equals
    // int Phi V Phi^T over the window.
    MatX Phi = MatX::Identity(dim, dim);
    MatX Gv = MatX::Zero(dim, dim);
    std::vector<MatX> phi_at_event;
    std::size_t next_event = j - gamma;
    for (std::size_t k = k0; k <= k1; ++k) {
      while (next_event <= j && log.event_step[next_event] == k) {
        phi_at_event.push_back(Phi);
        ++next_event;
      }
      if (k == k1) break;
      const double h = log.step_t[k + 1] - log.step_t[k];
      const MatX A = a_matrix(log.step_omega[k], dim);
      const MatX& V = log.step_V[k];
      // One RK4 step of the coupled (Phi, Gv) system.
      const auto f_phi = [&](const MatX& X) { return A * X; };
      const auto f_gv = [&](const MatX& X) {
        return A * X + X * A.transpose() + V;
      };
      const MatX p1 = f_phi(Phi), g1 = f_gv(Gv);
      const MatX p2 = f_phi(Phi + 0.5 * h * p1), g2 = f_gv(Gv + 0.5 * h * g1);
      const MatX p3 = f_phi(Phi + 0.5 * h * p2), g3 = f_gv(Gv + 0.5 * h * g2);
      const MatX p4 = f_phi(Phi + h * p3), g4 = f_gv(Gv + h * g3);
      Phi += (h / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
      Gv = symmetrize(Gv + (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4));
    }
    if (phi_at_event.size() != static_cast<std::size_t>(gamma) + 1) {
      throw Error("gramian_diagnostics: event bookkeeping failure");
    }

    // (a) transition between the last two events in the window
    const MatX Phi_last =
        Phi * phi_at_event[gamma - 1].inverse(); // Phi(t_j <- t_{j-1})
    Eigen::SelfAdjointEigenSolver<MatX> es_phi(Phi_last.transpose() * Phi_last,
                                               Eigen::EigenvaluesOnly);
    rep.mu_phi = std::min(rep.mu_phi, es_phi.eigenvalues().minCoeff());

    // (b) int_{t_{j-gamma}}^{t_j} Phi^{t_j}_s V (Phi^{t_j}_s)^T ds
    Eigen::SelfAdjointEigenSolver<MatX> es_v(Gv, Eigen::EigenvaluesOnly);
    rep.mu_v = std::min(rep.mu_v, es_v.eigenvalues().minCoeff());
    rep.mu_V = std::max(rep.mu_V, es_v.eigenvalues().maxCoeff());

    // (c) sum_i Phi(t_i <- t_j)^T C^T Q_i^-1 C Phi(t_i <- t_j)
    const MatX Phi_j_inv = Phi.inverse();
    MatX S = MatX::Zero(dim, dim);
    for (int i = 0; i <= gamma; ++i) {
      const Mat3 Q = log.event_Q[j - gamma + i];
      const MatX B = C * phi_at_event[i] * Phi_j_inv; // C Phi(t_i <- t_j)
      S += B.transpose() * Q.inverse() * B;
    }
    Eigen::SelfAdjointEigenSolver<MatX> es_q(symmetrize(S),
                                             Eigen::EigenvaluesOnly);
    rep.mu_q = std::min(rep.mu_q, es_q.eigenvalues().minCoeff());
    rep.mu_Q = std::max(rep.mu_Q, es_q.eigenvalues().maxCoeff());
    ++rep.windows;
  }
  return rep;
}

} // namespace hinav
