#include "hinav/world.hpp"

#include <cmath>

#include "hinav/so3.hpp"

namespace hinav {

LandmarkSet LandmarkSet::with_uniform_weights(std::vector<Vec3> pts) {
  LandmarkSet lm;
  lm.weights.assign(pts.size(), pts.empty() ? 0.0 : 1.0 / double(pts.size()));
  lm.positions = std::move(pts);
  return lm;
}

void LandmarkSet::validate() const {
  if (positions.size() != weights.size()) {
    throw DegenerateLandmarks("landmark positions/weights size mismatch");
  }
  double sum = 0.0;
  for (double k : weights) {
    if (!(k > 0.0)) throw DegenerateLandmarks("landmark weights must be > 0");
    sum += k;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw DegenerateLandmarks("landmark weights must sum to 1");
  }
  for (const Vec3& p : positions) {
    if (!p.allFinite()) throw DegenerateLandmarks("non-finite landmark");
  }
}

LandmarkStats landmark_stats(const LandmarkSet& lm) {
  lm.validate();
  LandmarkStats s;
  for (std::size_t i = 0; i < lm.size(); ++i) {
    s.p_c += lm.weights[i] * lm.positions[i];
  }
  for (std::size_t i = 0; i < lm.size(); ++i) {
    const Vec3 d = lm.positions[i] - s.p_c;
    s.M += lm.weights[i] * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(s.M);
  const Vec3 ev = es.eigenvalues(); // ascending
  if (ev(1) < 1e-9 * std::max(ev(2), 1e-300)) {
    throw DegenerateLandmarks(
        "landmark field is (near) collinear: M has >= 2 near-zero eigenvalues");
  }
  s.Mbar = so3::mbar(s.M);
  Eigen::SelfAdjointEigenSolver<Mat3> esb(s.Mbar);
  s.varsigma = esb.eigenvalues()(0) / esb.eigenvalues()(2);
  return s;
}

std::pair<SamplingTimer, bool> timer_step(const SamplingTimer& timer, double dt,
                                          const CounterRng& rng,
                                          std::uint64_t draw_index) {
  if (!(dt > 0.0)) throw InvalidDt("timer_step: dt must be > 0");
  SamplingTimer next = timer;
  next.tau = timer.tau - dt;
  const bool fired = next.tau <= 1e-9 * dt;
  if (fired) {
    // Draw a grid-representable gap so that consecutive firings are
    // separated by an exact multiple of dt inside [T_m, T_M].
    const std::int64_t k_lo =
        static_cast<std::int64_t>(std::ceil(timer.T_m / dt - 1e-9));
    const std::int64_t k_hi =
        static_cast<std::int64_t>(std::floor(timer.T_M / dt + 1e-9));
    std::int64_t k;
    if (k_hi <= k_lo) {
      k = std::max<std::int64_t>(1, std::llround(timer.T_m / dt));
    } else {
      k = rng.uniform_int(draw_index, Channel::Timer, 0, k_lo, k_hi);
    }
    next.tau = double(k) * dt;
  }
  return {next, fired};
}

Vec3 apparent_accel(const TrueState& state, const Vec3& vdot, const Vec3& g) {
  return state.R.transpose() * (vdot - g);
}

LandmarkMeasurement measure_landmarks(const TrueState& state,
                                      const LandmarkSet& lm,
                                      const NoiseSpec* noise,
                                      std::uint64_t step) {
  LandmarkMeasurement out;
  out.t = state.t;
  out.values.reserve(lm.size());
  const Mat3 Rt = state.R.transpose();
  const CounterRng rng(noise != nullptr ? noise->seed : 0);
  for (std::size_t i = 0; i < lm.size(); ++i) {
    Vec3 y = Rt * (lm.positions[i] - state.p);
    if (noise != nullptr) {
      y += gaussian3(rng, noise->cov_landmark, step, Channel::Landmark,
                     static_cast<std::uint32_t>(i));
    }
    out.values.emplace_back(static_cast<int>(i), y);
  }
  return out;
}

Vec3 eight_shape_omega() {
  return Vec3(std::sin(0.3 * M_PI), 0.1, std::cos(0.3 * M_PI));
}

Vec3 eight_shape_vdot(double t) {
  return 10.0 * Vec3(-std::sin(t), -2.0 * std::sin(2.0 * t), 0.0);
}

TrueState eight_shape_truth(double t) {
  TrueState s;
  s.t = t;
  s.p = 10.0 * Vec3(std::sin(t), std::sin(t) * std::cos(t), 1.0);
  s.v = 10.0 * Vec3(std::cos(t), std::cos(2.0 * t), 0.0);
  s.R = so3::exp(eight_shape_omega() * t); // omega constant => exact
  return s;
}

LandmarkSet generate_landmarks(int count, const Vec3& box_min,
                               const Vec3& box_max, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      const double u =
          rng.uniform(i, Channel::LandmarkField, static_cast<std::uint32_t>(a));
      p(a) = box_min(a) + u * (box_max(a) - box_min(a));
    }
    pts.push_back(p);
  }
  return LandmarkSet::with_uniform_weights(std::move(pts));
}

std::size_t SimData::measurement_count() const {
  std::size_t n = 0;
  for (const auto& m : meas) n += m.has_value() ? 1 : 0;
  return n;
}

SimData simulate(const SimConfig& cfg, const LandmarkSet& lm) {
  if (!(cfg.duration > 0.0)) throw InvalidDt("simulate: duration must be > 0");
  if (!(cfg.dt > 0.0) || cfg.dt > cfg.T_m / 2.0 + 1e-12) {
    throw InvalidDt("simulate: need 0 < dt <= T_m / 2");
  }
  if (!(cfg.T_m > 0.0) || cfg.T_m > cfg.T_M) {
    throw InvalidDt("simulate: need 0 < T_m <= T_M");
  }
  lm.validate();

  const std::uint64_t seed = cfg.noise ? cfg.noise->seed : 0;
  CounterRng rng(seed);

  SimData out;
  out.landmarks = lm;
  out.gravity = cfg.gravity;
  out.dt = cfg.dt;

  const std::size_t n_steps =
      static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
  out.imu.reserve(n_steps + 1);
  out.meas.resize(n_steps + 1);
  out.truth.reserve(n_steps + 1);

  SamplingTimer timer{0.0, cfg.T_m, cfg.T_M};
  std::uint64_t draws = 0;
  if (cfg.tau0) {
    timer.tau = *cfg.tau0;
  } else {
    timer = timer_step(SamplingTimer{0.0, cfg.T_m, cfg.T_M}, cfg.dt, rng,
                       draws++)
                .first;
  }

  const Vec3 omega = eight_shape_omega();
  const Mat3 step_rot = so3::exp(omega * cfg.dt);
  TrueState truth = eight_shape_truth(0.0);

  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = double(k) * cfg.dt;
    truth.t = t;
    truth.p = 10.0 * Vec3(std::sin(t), std::sin(t) * std::cos(t), 1.0);
    truth.v = 10.0 * Vec3(std::cos(t), std::cos(2.0 * t), 0.0);

    ImuSample imu;
    imu.t = t;
    imu.omega = omega;
    imu.accel = apparent_accel(truth, eight_shape_vdot(t), cfg.gravity);
    if (cfg.noise) {
      CounterRng nrng(cfg.noise->seed);
      imu.omega += gaussian3(nrng, cfg.noise->cov_omega, k, Channel::Gyro, 0);
      imu.accel += gaussian3(nrng, cfg.noise->cov_accel, k, Channel::Accel, 0);
    }
    out.imu.push_back(imu);
    out.truth.push_back(truth);

    if (k > 0) {
      auto [next, fired] = timer_step(timer, cfg.dt, rng, draws);
      timer = next;
      if (fired) {
        ++draws;
        const NoiseSpec* ns = cfg.noise ? &*cfg.noise : nullptr;
        out.meas[k] = measure_landmarks(truth, lm, ns, k);
      }
    }

    truth.R = truth.R * step_rot; // exact for constant omega
  }
  return out;
}

} // namespace hinav
