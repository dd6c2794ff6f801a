#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hinav/rng.hpp"
#include "hinav/types.hpp"

namespace hinav {

/// Ground-truth rigid-body state at time t.
struct TrueState {
  Mat3 R = Mat3::Identity(); ///< body-to-inertial attitude
  Vec3 p = Vec3::Zero();     ///< position, inertial frame [m]
  Vec3 v = Vec3::Zero();     ///< velocity, inertial frame [m/s]
  double t = 0.0;            ///< time [s]
};

/// Weighted landmark field in the inertial frame. Weights are strictly
/// positive and sum to one.
struct LandmarkSet {
  std::vector<Vec3> positions;
  std::vector<double> weights;

  static LandmarkSet with_uniform_weights(std::vector<Vec3> pts);
  std::size_t size() const { return positions.size(); }
  void validate() const;
};

/// First and second moments of a landmark field.
struct LandmarkStats {
  Vec3 p_c = Vec3::Zero(); ///< weighted center
  Mat3 M = Mat3::Zero();   ///< weighted second moment about p_c
  Mat3 Mbar = Mat3::Zero();///< 0.5 (tr(M) I - M), positive definite
  double varsigma = 0.0;   ///< lambda_min(Mbar) / lambda_max(Mbar), in (0, 1]
};

/// Computes p_c, M, Mbar and the eigenvalue ratio. Throws
/// DegenerateLandmarks when M has two (or more) near-zero eigenvalues,
/// i.e. fewer than three non-collinear landmarks.
LandmarkStats landmark_stats(const LandmarkSet& lm);

/// Countdown timer driving the intermittent measurement events. tau
/// decreases at unit rate and is reset into [T_m, T_M] on firing.
struct SamplingTimer {
  double tau = 0.0;
  double T_m = 0.0;
  double T_M = 0.0;
};

struct ImuSample {
  double t = 0.0;
  Vec3 omega = Vec3::Zero(); ///< angular velocity, body frame [rad/s]
  Vec3 accel = Vec3::Zero(); ///< apparent acceleration, body frame [m/s^2]
};

struct LandmarkMeasurement {
  double t = 0.0;
  std::vector<std::pair<int, Vec3>> values; ///< (landmark id, body-frame vector)
};

struct NoiseSpec {
  Mat3 cov_omega = Mat3::Zero();
  Mat3 cov_accel = Mat3::Zero();
  Mat3 cov_landmark = Mat3::Zero();
  std::uint64_t seed = 0;
};

/// Advances the timer by dt. Fires when the countdown crosses zero; the
/// reset value is drawn uniformly from the grid-representable points of
/// [T_m, T_M] (multiples of dt), so inter-event gaps stay inside
/// [T_m, T_M] exactly and events land on integration-grid points.
/// Throws InvalidDt if dt <= 0.
std::pair<SamplingTimer, bool> timer_step(const SamplingTimer& timer, double dt,
                                          const CounterRng& rng,
                                          std::uint64_t draw_index);

/// Apparent (accelerometer) acceleration a = R^T (vdot - g).
Vec3 apparent_accel(const TrueState& state, const Vec3& vdot, const Vec3& g);

/// Body-frame landmark measurements y_i = R^T (p_i - p), optionally with
/// additive Gaussian noise drawn from the counter-based generator.
LandmarkMeasurement measure_landmarks(const TrueState& state,
                                      const LandmarkSet& lm,
                                      const NoiseSpec* noise,
                                      std::uint64_t step = 0);

/// Figure-eight benchmark trajectory:
///   p(t) = 10 [sin t, sin t cos t, 1],  R(0) = I,
///   omega = [sin(0.3 pi), 0.1, cos(0.3 pi)] (constant, body frame).
TrueState eight_shape_truth(double t);
Vec3 eight_shape_omega();
Vec3 eight_shape_vdot(double t);

/// Uniform random landmarks inside an axis-aligned box, uniform weights.
LandmarkSet generate_landmarks(int count, const Vec3& box_min,
                               const Vec3& box_max, std::uint64_t seed);

struct SimConfig {
  double duration = 60.0;
  double dt = 0.005;
  double T_m = 0.04;
  double T_M = 0.06;
  std::optional<double> tau0;        ///< initial countdown; drawn if unset
  std::optional<NoiseSpec> noise;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
};

/// One synchronized dataset: IMU at every grid point, measurements at
/// timer firings (indexed by IMU step), ground truth at every grid point.
struct SimData {
  std::vector<ImuSample> imu;
  std::vector<std::optional<LandmarkMeasurement>> meas; ///< aligned with imu
  std::vector<TrueState> truth;                         ///< may be empty (replay)
  LandmarkSet landmarks;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double dt = 0.0;

  std::size_t measurement_count() const;
};

/// Runs the truth simulator over [0, duration]. The truth attitude is
/// advanced by the exact per-step map R exp(hat(omega) dt); measurement
/// events are aligned to grid points by the timer.
SimData simulate(const SimConfig& cfg, const LandmarkSet& lm);

} // namespace hinav
