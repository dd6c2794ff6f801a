#pragma once

#include <optional>
#include <vector>

#include "hinav/riccati.hpp"
#include "hinav/types.hpp"
#include "hinav/world.hpp"

namespace hinav {

/// The four observer variants: fixed or Riccati-scheduled gains, with the
/// gravity vector known or estimated.
enum class Variant { FixedKnownG, FixedEstG, VarKnownG, VarEstG };

bool variant_estimates_gravity(Variant v);
bool variant_variable_gain(Variant v);

/// Options for the Riccati-scheduled variants. When `frozen` is set the
/// gain is computed once from (frozen_P, frozen_Q) and P is neither
/// propagated nor updated (used for cross-variant consistency checks).
struct RiccatiOptions {
  double p0 = 1.0; ///< P(0) = p0 * I
  NoiseModel noise;
  bool frozen = false;
  MatX frozen_P;
  Mat3 frozen_Q = Mat3::Identity();
};

struct ObserverConfig {
  Variant variant = Variant::FixedKnownG;
  double k_R = 1.2;
  double k_p = 0.5;
  double k_v = 1.0;
  double k_g = 0.6;
  Vec3 g_known = Vec3(0.0, 0.0, -9.81);
  RiccatiOptions riccati;

  bool estimates_gravity() const { return variant_estimates_gravity(variant); }
  bool variable_gain() const { return variant_variable_gain(variant); }
  int riccati_dim() const { return estimates_gravity() ? 9 : 6; }
  void validate() const;
};

struct ObserverState {
  Mat3 R_hat = Mat3::Identity();
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  Vec3 eta = Vec3::Zero();   ///< auxiliary attitude-correction vector
  Vec3 g_hat = Vec3::Zero(); ///< only meaningful for gravity-estimating variants
  MatX P;                    ///< Riccati matrix, empty for fixed-gain variants
  double tau_mirror = 0.0;   ///< diagnostics copy of the sampling timer
  double t = 0.0;
};

/// Geometric estimation errors R~ = R R^^T, p~ = p - R~ p^ - (I - R~) p_c,
/// v~ = v - R~ v^, and g~ = g - R~ g^ for gravity-estimating variants.
struct ErrorState {
  Mat3 R_tilde = Mat3::Identity();
  Vec3 p_tilde = Vec3::Zero();
  Vec3 v_tilde = Vec3::Zero();
  std::optional<Vec3> g_tilde;
};

/// Innovation pair computed at a measurement event:
///   sigma_R = 0.5 sum k_i hat(p_i - p_c) (p_i - p^ - R^ y_i)
///   y       =     sum k_i (p_i - p^ - R^ y_i)
/// Weights are renormalized over the measured subset; `stats` holds the
/// subset moments actually used.
struct Innovation {
  Vec3 sigma_R = Vec3::Zero();
  Vec3 y = Vec3::Zero();
  LandmarkStats stats;
};

Innovation innovation(const LandmarkSet& lm, const LandmarkMeasurement& meas,
                      const Mat3& R_hat, const Vec3& p_hat);

/// Flow over one step. Attitude advances by the exponential map with the
/// effective rate omega + R^^T eta held over the step; the translational
/// states advance by RK4 with the IMU interpolated linearly between the
/// two samples and eta held. Riccati-scheduled variants also propagate P.
ObserverState flow(const ObserverState& state, const ImuSample& imu_begin,
                   const ImuSample& imu_end, double dt,
                   const ObserverConfig& cfg, const Vec3& p_c);

/// Zero-order-hold convenience overload (imu_end = imu_begin).
ObserverState flow(const ObserverState& state, const ImuSample& imu, double dt,
                   const ObserverConfig& cfg, const Vec3& p_c);

/// Measurement jump. The attitude is continuous across jumps; eta is set
/// to k_R sigma_R and the translational states are corrected by the
/// variant's gain acting on y.
ObserverState jump(const ObserverState& state, const LandmarkSet& lm,
                   const LandmarkMeasurement& meas, const ObserverConfig& cfg,
                   Innovation* innovation_out = nullptr,
                   double* gain_norm_out = nullptr);

ErrorState error_state(const ObserverState& state, const TrueState& truth,
                       const Vec3& p_c, const Vec3& g, bool estimates_gravity);
ErrorState error_state(const ObserverState& state, const TrueState& truth,
                       const LandmarkSet& lm, const Vec3& g,
                       bool estimates_gravity);

struct StepRecord {
  double t = 0.0;
  Mat3 R_hat = Mat3::Identity();
  Vec3 p_hat = Vec3::Zero();
  Vec3 v_hat = Vec3::Zero();
  Vec3 eta = Vec3::Zero();
  Vec3 g_hat = Vec3::Zero();
  double tau = 0.0;
  bool event = false;
  std::optional<Innovation> innov; ///< present on event rows
  std::optional<ErrorState> error; ///< present when ground truth is available
  double p_eig_min = 0.0;          ///< Riccati health (variable variants)
  double p_eig_max = 0.0;
  double gain_norm = 0.0;          ///< ||K|| at events
};

struct RunOptions {
  bool collect_errors = true;
  bool collect_riccati_log = false;
};

struct RunResult {
  std::vector<StepRecord> steps;
  RiccatiLog riccati_log;
};

/// Hybrid executor: flows between measurement events and jumps at events,
/// in event order, deterministically. Throws NonMonotoneTime if the IMU
/// grid is not strictly increasing.
RunResult run(const SimData& data, const ObserverConfig& cfg,
              const ObserverState& init, const RunOptions& opts = {});

/// Default initial state: all estimates zero, P = p0 I, and the given
/// initial attitude estimate.
ObserverState default_init(const ObserverConfig& cfg,
                           const Mat3& R_hat0 = Mat3::Identity());

} // namespace hinav
