#include "hinav/observer.hpp"

#include <cmath>

#include "hinav/so3.hpp"

namespace hinav {

bool variant_estimates_gravity(Variant v) {
  return v == Variant::FixedEstG || v == Variant::VarEstG;
}

bool variant_variable_gain(Variant v) {
  return v == Variant::VarKnownG || v == Variant::VarEstG;
}

void ObserverConfig::validate() const {
  if (!(k_R > 0.0)) throw ConfigError("observer: k_R must be > 0");
  if (!variable_gain()) {
    if (!(k_p > 0.0) || !(k_v > 0.0)) {
      throw ConfigError("observer: k_p, k_v must be > 0");
    }
    if (estimates_gravity() && !(k_g > 0.0)) {
      throw ConfigError("observer: k_g must be > 0");
    }
  } else {
    if (!(riccati.p0 > 0.0)) throw ConfigError("observer: P(0) must be PD");
    if (riccati.frozen) {
      if (riccati.frozen_P.rows() != riccati_dim() ||
          riccati.frozen_P.cols() != riccati_dim()) {
        throw ConfigError("observer: frozen P has wrong dimension");
      }
    }
  }
  if (!g_known.allFinite()) throw ConfigError("observer: g must be finite");
}

Innovation innovation(const LandmarkSet& lm, const LandmarkMeasurement& meas,
                      const Mat3& R_hat, const Vec3& p_hat) {
  LandmarkSet visible;
  std::vector<Vec3> body;
  double weight_sum = 0.0;
  for (const auto& [id, y_i] : meas.values) {
    if (id < 0 || static_cast<std::size_t>(id) >= lm.size()) {
      throw UnknownLandmarkId("innovation: measurement references landmark " +
                              std::to_string(id));
    }
    visible.positions.push_back(lm.positions[id]);
    visible.weights.push_back(lm.weights[id]);
    weight_sum += lm.weights[id];
    body.push_back(y_i);
  }
  if (visible.size() < 3) {
    throw InsufficientLandmarks("innovation: fewer than 3 landmarks measured");
  }
  for (double& w : visible.weights) w /= weight_sum;

  Innovation out;
  try {
    out.stats = landmark_stats(visible);
  } catch (const DegenerateLandmarks& e) {
    throw InsufficientLandmarks(std::string("innovation: ") + e.what());
  }
  for (std::size_t i = 0; i < visible.size(); ++i) {
    const Vec3 r = visible.positions[i] - p_hat - R_hat * body[i];
    out.sigma_R +=
        0.5 * visible.weights[i] *
        so3::hat(visible.positions[i] - out.stats.p_c) * r;
    out.y += visible.weights[i] * r;
  }
  return out;
}

namespace {

struct TransState {
  Vec3 p, v, g;
};

TransState operator+(const TransState& a, const TransState& b) {
  return {a.p + b.p, a.v + b.v, a.g + b.g};
}
TransState operator*(double s, const TransState& a) {
  return {s * a.p, s * a.v, s * a.g};
}

} // namespace

ObserverState flow(const ObserverState& state, const ImuSample* imu_prev,
                   const ImuSample& imu_begin, const ImuSample& imu_end,
                   double dt, const ObserverConfig& cfg, const Vec3& p_c) {
  if (!(dt > 0.0)) throw InvalidDt("flow: dt must be > 0");

  const Vec3 eta = state.eta;
  const Vec3 omega_eff = imu_begin.omega + state.R_hat.transpose() * eta;
  const bool est_g = cfg.estimates_gravity();

  // Forcing u(s) = R^(s) a(s) with the accelerometer interpolated across
  // the step (quadratic through the previous sample when available,
  // otherwise linear) and R^ advanced along the held effective rate.
  const Mat3 half_rot = so3::exp(omega_eff * (0.5 * dt));
  const Mat3 R0 = state.R_hat;
  const Mat3 Rh = R0 * half_rot;
  const Mat3 R1 = Rh * half_rot;
  const Vec3 a0 = imu_begin.accel;
  Vec3 ah = 0.5 * (imu_begin.accel + imu_end.accel);
  if (imu_prev != nullptr && imu_prev->t < imu_begin.t) {
    const double tp = imu_prev->t;
    const double t0 = imu_begin.t;
    const double t1 = imu_end.t;
    const double tm = t0 + 0.5 * dt;
    const double wp = (tm - t0) * (tm - t1) / ((tp - t0) * (tp - t1));
    const double w0 = (tm - tp) * (tm - t1) / ((t0 - tp) * (t0 - t1));
    const double w1 = (tm - tp) * (tm - t0) / ((t1 - tp) * (t1 - t0));
    ah = wp * imu_prev->accel + w0 * imu_begin.accel + w1 * imu_end.accel;
  }
  const Vec3 a1 = imu_end.accel;
  const Vec3 u0 = R0 * a0;
  const Vec3 uh = Rh * ah;
  const Vec3 u1 = R1 * a1;

  const auto deriv = [&](const TransState& x, const Vec3& u) -> TransState {
    TransState d;
    d.p = eta.cross(x.p - p_c) + x.v;
    d.v = eta.cross(x.v) + (est_g ? x.g : cfg.g_known) + u;
    d.g = est_g ? eta.cross(x.g) : Vec3::Zero();
    return d;
  };

  const TransState x0{state.p_hat, state.v_hat, state.g_hat};
  const TransState k1 = deriv(x0, u0);
  const TransState k2 = deriv(x0 + (0.5 * dt) * k1, uh);
  const TransState k3 = deriv(x0 + (0.5 * dt) * k2, uh);
  const TransState k4 = deriv(x0 + dt * k3, u1);
  const TransState x1 =
      x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  ObserverState next = state;
  next.R_hat = R1;
  if (so3::orthonormality_error(next.R_hat) > 1e-9) {
    next.R_hat = so3::project(next.R_hat);
  }
  next.p_hat = x1.p;
  next.v_hat = x1.v;
  if (est_g) next.g_hat = x1.g;
  next.t = state.t + dt;
  next.tau_mirror = std::max(0.0, state.tau_mirror - dt);

  if (cfg.variable_gain() && !cfg.riccati.frozen) {
    const int dim = cfg.riccati_dim();
    const auto [V, Q] = adapt_noise(
        state.R_hat, state.p_hat, state.v_hat, state.g_hat, p_c,
        /*weights=*/{}, cfg.riccati.noise, dim);
    (void)Q;
    RiccatiState rs{state.P, dim};
    next.P = flow_P(rs, imu_begin.omega, V, dt).P;
  }

  if (!next.p_hat.allFinite() || !next.v_hat.allFinite() ||
      !next.g_hat.allFinite() || !next.eta.allFinite() ||
      !next.R_hat.allFinite()) {
    throw NonFiniteState("flow: observer state left the finite range");
  }
  return next;
}

ObserverState flow(const ObserverState& state, const ImuSample& imu, double dt,
                   const ObserverConfig& cfg, const Vec3& p_c) {
  return flow(state, imu, imu, dt, cfg, p_c);
}

ObserverState jump(const ObserverState& state, const LandmarkSet& lm,
                   const LandmarkMeasurement& meas, const ObserverConfig& cfg,
                   Innovation* innovation_out, double* gain_norm_out) {
  const Innovation inn = innovation(lm, meas, state.R_hat, state.p_hat);
  if (innovation_out != nullptr) *innovation_out = inn;
  if (gain_norm_out != nullptr) *gain_norm_out = 0.0;

  ObserverState next = state;
  next.eta = cfg.k_R * inn.sigma_R;

  if (!cfg.variable_gain()) {
    next.p_hat += cfg.k_p * inn.y;
    next.v_hat += cfg.k_v * inn.y;
    if (cfg.estimates_gravity()) next.g_hat += cfg.k_g * inn.y;
    return next;
  }

  const int dim = cfg.riccati_dim();
  MatX K;
  if (cfg.riccati.frozen) {
    const MatX& P = cfg.riccati.frozen_P;
    const Mat3 S = P.topLeftCorner(3, 3) + cfg.riccati.frozen_Q;
    Eigen::LLT<Mat3> llt(S);
    if (llt.info() != Eigen::Success) {
      throw SingularInnovationCovariance("jump: C P C^T + Q not invertible");
    }
    K = llt.solve(P.leftCols(3).transpose()).transpose();
  } else {
    const auto [V, Q] =
        adapt_noise(state.R_hat, state.p_hat, state.v_hat, state.g_hat,
                    inn.stats.p_c, lm.weights, cfg.riccati.noise, dim);
    (void)V;
    RiccatiState rs{state.P, dim};
    auto [updated, gain] = update_P(rs, Q);
    next.P = updated.P;
    K = gain;
  }
  if (gain_norm_out != nullptr) *gain_norm_out = K.norm();

  const Mat3 R = state.R_hat;
  const Mat3 Rt = R.transpose();
  next.p_hat += R * K.block<3, 3>(0, 0) * Rt * inn.y;
  next.v_hat += R * K.block<3, 3>(3, 0) * Rt * inn.y;
  if (cfg.estimates_gravity()) {
    next.g_hat += R * K.block<3, 3>(6, 0) * Rt * inn.y;
  }
  return next;
}

ErrorState error_state(const ObserverState& state, const TrueState& truth,
                       const Vec3& p_c, const Vec3& g, bool estimates_gravity) {
  ErrorState e;
  e.R_tilde = truth.R * state.R_hat.transpose();
  e.p_tilde = truth.p - e.R_tilde * state.p_hat -
              (Mat3::Identity() - e.R_tilde) * p_c;
  e.v_tilde = truth.v - e.R_tilde * state.v_hat;
  if (estimates_gravity) e.g_tilde = g - e.R_tilde * state.g_hat;
  return e;
}

ErrorState error_state(const ObserverState& state, const TrueState& truth,
                       const LandmarkSet& lm, const Vec3& g,
                       bool estimates_gravity) {
  return error_state(state, truth, landmark_stats(lm).p_c, g,
                     estimates_gravity);
}

ObserverState default_init(const ObserverConfig& cfg, const Mat3& R_hat0) {
  ObserverState s;
  s.R_hat = R_hat0;
  if (cfg.variable_gain() && !cfg.riccati.frozen) {
    const int dim = cfg.riccati_dim();
    s.P = cfg.riccati.p0 * MatX::Identity(dim, dim);
  }
  return s;
}

RunResult run(const SimData& data, const ObserverConfig& cfg,
              const ObserverState& init, const RunOptions& opts) {
  cfg.validate();
  data.landmarks.validate();
  if (data.imu.empty()) throw Error("run: empty IMU stream");
  if (data.meas.size() != data.imu.size()) {
    throw Error("run: measurement array must align with the IMU grid");
  }
  const bool have_truth = data.truth.size() == data.imu.size();
  const LandmarkStats stats = landmark_stats(data.landmarks);
  const int dim = cfg.riccati_dim();

  // Event schedule, used only to mirror the timer for diagnostics.
  std::vector<double> event_times;
  for (std::size_t k = 0; k < data.meas.size(); ++k) {
    if (data.meas[k]) event_times.push_back(data.imu[k].t);
  }

  RunResult out;
  out.steps.reserve(data.imu.size());
  if (opts.collect_riccati_log) {
    out.riccati_log.dim = dim;
  }

  ObserverState state = init;
  state.t = data.imu[0].t;

  std::size_t next_event = 0;
  const auto mirror_tau = [&](double t) {
    while (next_event < event_times.size() && event_times[next_event] < t - 1e-12) {
      ++next_event;
    }
    return next_event < event_times.size() ? event_times[next_event] - t : 0.0;
  };

  const auto emit = [&](const ObserverState& s, bool event,
                        const Innovation* inn, double gain_norm) {
    StepRecord rec;
    rec.t = s.t;
    rec.R_hat = s.R_hat;
    rec.p_hat = s.p_hat;
    rec.v_hat = s.v_hat;
    rec.eta = s.eta;
    rec.g_hat = s.g_hat;
    rec.tau = s.tau_mirror;
    rec.event = event;
    rec.gain_norm = gain_norm;
    if (inn != nullptr) rec.innov = *inn;
    if (cfg.variable_gain() && !cfg.riccati.frozen) {
      Eigen::SelfAdjointEigenSolver<MatX> es(s.P, Eigen::EigenvaluesOnly);
      rec.p_eig_min = es.eigenvalues().minCoeff();
      rec.p_eig_max = es.eigenvalues().maxCoeff();
    }
    if (have_truth && opts.collect_errors) {
      const std::size_t k = out.steps.size();
      rec.error = error_state(s, data.truth[k], stats.p_c, data.gravity,
                              cfg.estimates_gravity());
    }
    out.steps.push_back(rec);
  };

  const bool log_riccati =
      opts.collect_riccati_log && cfg.variable_gain() && !cfg.riccati.frozen;

  state.tau_mirror = mirror_tau(state.t);
  if (data.meas[0]) {
    Innovation inn;
    double knorm = 0.0;
    state = jump(state, data.landmarks, *data.meas[0], cfg, &inn, &knorm);
    state.tau_mirror = mirror_tau(state.t + 1e-12);
    emit(state, true, &inn, knorm);
  } else {
    emit(state, false, nullptr, 0.0);
  }

  for (std::size_t k = 1; k < data.imu.size(); ++k) {
    const double dt = data.imu[k].t - data.imu[k - 1].t;
    if (!(dt > 0.0)) {
      throw NonMonotoneTime("run: IMU timestamps must strictly increase");
    }
    if (log_riccati) {
      const auto [V, Q] =
          adapt_noise(state.R_hat, state.p_hat, state.v_hat, state.g_hat,
                      stats.p_c, data.landmarks.weights, cfg.riccati.noise,
                      dim);
      (void)Q;
      out.riccati_log.step_t.push_back(data.imu[k - 1].t);
      out.riccati_log.step_omega.push_back(data.imu[k - 1].omega);
      out.riccati_log.step_V.push_back(V);
    }
    state = flow(state, data.imu[k - 1], data.imu[k], dt, cfg, stats.p_c);
    state.t = data.imu[k].t;
    bool event = false;
    Innovation inn;
    double knorm = 0.0;
    if (data.meas[k]) {
      if (log_riccati) {
        const auto [V, Q] =
            adapt_noise(state.R_hat, state.p_hat, state.v_hat, state.g_hat,
                        stats.p_c, data.landmarks.weights, cfg.riccati.noise,
                        dim);
        (void)V;
        out.riccati_log.event_step.push_back(out.riccati_log.step_t.size());
        out.riccati_log.event_Q.push_back(Q);
      }
      state = jump(state, data.landmarks, *data.meas[k], cfg, &inn, &knorm);
      event = true;
    }
    state.tau_mirror = mirror_tau(state.t + 1e-12);
    emit(state, event, event ? &inn : nullptr, knorm);
  }
  if (log_riccati) {
    out.riccati_log.step_t.push_back(data.imu.back().t);
  }
  return out;
}

} // namespace hinav
