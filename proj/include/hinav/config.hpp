#pragma once

#include <map>
#include <optional>
#include <string>

#include "hinav/observer.hpp"
#include "hinav/world.hpp"

namespace hinav {

/// Flat "[section]" + "key = value" text format. Keys are reported as
/// "section.key". Unknown keys are rejected at RunConfig validation.
class ConfigMap {
public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text,
                                const std::string& name = "<string>");

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;           // throws ConfigError
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  Vec3 get_vec3_or(const std::string& key, const Vec3& fallback) const;

  const std::map<std::string, std::string>& entries() const { return map_; }
  int line_of(const std::string& key) const;

private:
  std::map<std::string, std::string> map_;
  std::map<std::string, int> lines_;
  std::string name_;
};

/// Fully resolved run description for the CLI.
struct RunConfig {
  // [run]
  Variant variant = Variant::FixedKnownG;
  double duration = 60.0;
  double dt = 0.005;
  std::uint64_t seed = 1;

  // [gains]
  double k_R = 1.2;
  double k_p = 0.5;
  double k_v = 1.0;
  double k_g = 0.6;

  // [timer]
  double T_m = 0.04;
  double T_M = 0.06;
  bool periodic = false; ///< forces T_M = T_m
  std::optional<double> tau0;

  // [noise]
  bool noise_enabled = false;
  double var_omega = 1e-4;
  double var_accel = 1e-2;
  double var_landmark = 1e-2;

  // [riccati]
  double p0 = 1.0;
  double floor_v = 1e-9;
  bool frozen = false;
  std::vector<double> frozen_p; ///< reduced upper triangle, row-major
  double frozen_q = 1.0;

  // [landmarks]
  std::string lm_source = "generated"; ///< "generated" | "file"
  int lm_count = 25;
  Vec3 lm_box_min = Vec3(-10.0, -10.0, 0.0);
  Vec3 lm_box_max = Vec3(10.0, 10.0, 0.0);
  std::uint64_t lm_seed = 42;
  std::string lm_file;

  // [world]
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  // [init]
  double att_angle = 0.1 * M_PI;
  Vec3 att_axis = Vec3(1.0, 1.0, 1.0).normalized();
  Vec3 p0_hat = Vec3::Zero();
  Vec3 v0_hat = Vec3::Zero();
  Vec3 g0_hat = Vec3::Zero();
  Vec3 eta0 = Vec3::Zero();

  // [output]
  std::string out_dir = ".";

  // [replay]
  std::string imu_file = "imu.csv";
  std::string meas_file = "meas.csv";
  std::string landmarks_file = "landmarks.csv";
  std::string gt_file; ///< optional

  // [certify]
  double cert_mu = 1e-4;
  int cert_dim = 0; ///< 0 = derive from variant

  static RunConfig from_map(const ConfigMap& map);
  static RunConfig from_file(const std::string& path);

  ObserverConfig observer_config() const;
  SimConfig sim_config() const;
  LandmarkSet load_landmarks() const;
  Mat3 initial_attitude() const;
  ObserverState initial_state() const;
  int certification_dim() const;

  /// Echo sufficient to reproduce the run exactly.
  std::string resolved_text() const;
};

Variant parse_variant(const std::string& s);
std::string variant_name(Variant v);

} // namespace hinav
