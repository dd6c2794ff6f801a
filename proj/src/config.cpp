#include "hinav/config.hpp"

#include <fstream>
#include <sstream>

#include "hinav/csv_io.hpp"
#include "hinav/gain_cert.hpp"
#include "hinav/so3.hpp"

namespace hinav {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& s, const std::string& key) {
  std::istringstream iss(s);
  std::vector<double> out;
  double v;
  while (iss >> v) out.push_back(v);
  std::string rest;
  if (iss.fail() && !iss.eof()) {
    throw ConfigError("config: key '" + key + "': cannot parse '" + s + "'");
  }
  return out;
}

} // namespace

ConfigMap ConfigMap::parse_string(const std::string& text,
                                  const std::string& name) {
  ConfigMap cfg;
  cfg.name_ = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(name + ":" + std::to_string(lineno) +
                          ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError(name + ":" + std::to_string(lineno) +
                          ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!cfg.map_.emplace(full, value).second) {
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": duplicate key '" + full + "'");
    }
    cfg.lines_[full] = lineno;
  }
  return cfg;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str(), path);
}

bool ConfigMap::has(const std::string& key) const { return map_.count(key) > 0; }

std::string ConfigMap::get(const std::string& key) const {
  const auto it = map_.find(key);
  if (it == map_.end()) {
    throw ConfigError(name_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string ConfigMap::get_or(const std::string& key,
                              const std::string& fallback) const {
  const auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key) const {
  const auto nums = parse_numbers(get(key), key);
  if (nums.size() != 1) {
    throw ConfigError(name_ + ": key '" + key + "' (line " +
                      std::to_string(line_of(key)) + ") must be one number");
  }
  return nums[0];
}

double ConfigMap::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t ConfigMap::get_u64_or(const std::string& key,
                                    std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return static_cast<std::uint64_t>(get_double(key));
}

bool ConfigMap::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(name_ + ": key '" + key + "' (line " +
                    std::to_string(line_of(key)) + ") must be a boolean");
}

Vec3 ConfigMap::get_vec3_or(const std::string& key, const Vec3& fallback) const {
  if (!has(key)) return fallback;
  const auto nums = parse_numbers(get(key), key);
  if (nums.size() != 3) {
    throw ConfigError(name_ + ": key '" + key + "' (line " +
                      std::to_string(line_of(key)) +
                      ") must be three numbers");
  }
  return Vec3(nums[0], nums[1], nums[2]);
}

int ConfigMap::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

Variant parse_variant(const std::string& s) {
  if (s == "fixed_known_g") return Variant::FixedKnownG;
  if (s == "fixed_est_g") return Variant::FixedEstG;
  if (s == "var_known_g") return Variant::VarKnownG;
  if (s == "var_est_g") return Variant::VarEstG;
  throw ConfigError("unknown variant '" + s +
                    "' (expected fixed_known_g, fixed_est_g, var_known_g or "
                    "var_est_g)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::FixedKnownG: return "fixed_known_g";
    case Variant::FixedEstG: return "fixed_est_g";
    case Variant::VarKnownG: return "var_known_g";
    case Variant::VarEstG: return "var_est_g";
  }
  return "?";
}

RunConfig RunConfig::from_map(const ConfigMap& m) {
  RunConfig c;
  c.variant = parse_variant(m.get_or("run.variant", "fixed_known_g"));
  c.duration = m.get_double_or("run.duration", c.duration);
  c.dt = m.get_double_or("run.dt", c.dt);
  c.seed = m.get_u64_or("run.seed", c.seed);

  c.k_R = m.get_double_or("gains.k_R", c.k_R);
  c.k_p = m.get_double_or("gains.k_p", c.k_p);
  c.k_v = m.get_double_or("gains.k_v", c.k_v);
  c.k_g = m.get_double_or("gains.k_g", c.k_g);

  c.T_m = m.get_double_or("timer.T_m", c.T_m);
  c.T_M = m.get_double_or("timer.T_M", c.T_M);
  c.periodic = m.get_bool_or("timer.periodic", c.periodic);
  if (c.periodic) c.T_M = c.T_m;
  if (m.has("timer.tau0")) c.tau0 = m.get_double("timer.tau0");

  c.noise_enabled = m.get_bool_or("noise.enabled", c.noise_enabled);
  c.var_omega = m.get_double_or("noise.var_omega", c.var_omega);
  c.var_accel = m.get_double_or("noise.var_accel", c.var_accel);
  c.var_landmark = m.get_double_or("noise.var_landmark", c.var_landmark);

  c.p0 = m.get_double_or("riccati.p0", c.p0);
  c.floor_v = m.get_double_or("riccati.floor_v", c.floor_v);
  c.frozen = m.get_bool_or("riccati.frozen", c.frozen);
  if (m.has("riccati.frozen_p")) {
    c.frozen_p = parse_numbers(m.get("riccati.frozen_p"), "riccati.frozen_p");
  }
  c.frozen_q = m.get_double_or("riccati.frozen_q", c.frozen_q);

  c.lm_source = m.get_or("landmarks.source", c.lm_source);
  c.lm_count = static_cast<int>(m.get_double_or("landmarks.count", c.lm_count));
  c.lm_box_min = m.get_vec3_or("landmarks.box_min", c.lm_box_min);
  c.lm_box_max = m.get_vec3_or("landmarks.box_max", c.lm_box_max);
  c.lm_seed = m.get_u64_or("landmarks.seed", c.lm_seed);
  c.lm_file = m.get_or("landmarks.file", c.lm_file);

  c.gravity = m.get_vec3_or("world.gravity", c.gravity);

  c.att_angle = m.get_double_or("init.attitude_angle", c.att_angle);
  c.att_axis = m.get_vec3_or("init.attitude_axis", c.att_axis);
  c.p0_hat = m.get_vec3_or("init.p", c.p0_hat);
  c.v0_hat = m.get_vec3_or("init.v", c.v0_hat);
  c.g0_hat = m.get_vec3_or("init.g", c.g0_hat);
  c.eta0 = m.get_vec3_or("init.eta", c.eta0);

  c.out_dir = m.get_or("output.dir", c.out_dir);

  c.imu_file = m.get_or("replay.imu", c.imu_file);
  c.meas_file = m.get_or("replay.meas", c.meas_file);
  c.landmarks_file = m.get_or("replay.landmarks", c.landmarks_file);
  c.gt_file = m.get_or("replay.gt", c.gt_file);

  c.cert_mu = m.get_double_or("certify.mu", c.cert_mu);
  c.cert_dim = static_cast<int>(m.get_double_or("certify.dim", c.cert_dim));

  if (!(c.dt > 0.0)) throw ConfigError("run.dt must be > 0");
  if (!(c.duration > 0.0)) throw ConfigError("run.duration must be > 0");
  if (!(c.T_m > 0.0) || c.T_m > c.T_M) {
    throw ConfigError("timer: need 0 < T_m <= T_M");
  }
  if (c.lm_source != "generated" && c.lm_source != "file") {
    throw ConfigError("landmarks.source must be 'generated' or 'file'");
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_map(ConfigMap::parse_file(path));
}

ObserverConfig RunConfig::observer_config() const {
  ObserverConfig cfg;
  cfg.variant = variant;
  cfg.k_R = k_R;
  cfg.k_p = k_p;
  cfg.k_v = k_v;
  cfg.k_g = k_g;
  cfg.g_known = gravity;
  cfg.riccati.p0 = p0;
  cfg.riccati.noise.cov_omega = var_omega * Mat3::Identity();
  cfg.riccati.noise.cov_accel = var_accel * Mat3::Identity();
  cfg.riccati.noise.cov_landmark = {var_landmark * Mat3::Identity()};
  cfg.riccati.noise.floor_v = floor_v;
  cfg.riccati.frozen = frozen;
  if (frozen) {
    const int n = cfg.riccati_dim() / 3;
    const std::size_t need = std::size_t(n) * (n + 1) / 2;
    if (frozen_p.size() != need) {
      throw ConfigError("riccati.frozen_p needs " + std::to_string(need) +
                        " entries (reduced upper triangle)");
    }
    MatX Phat = MatX::Zero(n, n);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Phat(i, j) = Phat(j, i) = frozen_p[k++];
      }
    }
    cfg.riccati.frozen_P = kron_identity3(Phat);
    cfg.riccati.frozen_Q = frozen_q * Mat3::Identity();
  }
  cfg.validate();
  return cfg;
}

SimConfig RunConfig::sim_config() const {
  SimConfig sim;
  sim.duration = duration;
  sim.dt = dt;
  sim.T_m = T_m;
  sim.T_M = T_M;
  sim.tau0 = tau0;
  sim.gravity = gravity;
  if (noise_enabled) {
    NoiseSpec ns;
    ns.cov_omega = var_omega * Mat3::Identity();
    ns.cov_accel = var_accel * Mat3::Identity();
    ns.cov_landmark = var_landmark * Mat3::Identity();
    ns.seed = seed;
    sim.noise = ns;
  }
  return sim;
}

LandmarkSet RunConfig::load_landmarks() const {
  if (lm_source == "file") {
    if (lm_file.empty()) throw ConfigError("landmarks.file not set");
    return read_landmarks_csv(lm_file);
  }
  return generate_landmarks(lm_count, lm_box_min, lm_box_max, lm_seed);
}

Mat3 RunConfig::initial_attitude() const {
  if (att_angle == 0.0) return Mat3::Identity();
  return so3::angle_axis(att_angle, att_axis.normalized());
}

ObserverState RunConfig::initial_state() const {
  ObserverState s = default_init(observer_config(), initial_attitude());
  s.p_hat = p0_hat;
  s.v_hat = v0_hat;
  s.g_hat = g0_hat;
  s.eta = eta0;
  return s;
}

int RunConfig::certification_dim() const {
  if (cert_dim == 6 || cert_dim == 9) return cert_dim;
  return variant_estimates_gravity(variant) ? 9 : 6;
}

std::string RunConfig::resolved_text() const {
  std::ostringstream o;
  const auto d = [](double x) { return format_double(x); };
  const auto v3 = [&](const Vec3& v) {
    return d(v.x()) + " " + d(v.y()) + " " + d(v.z());
  };
  o << "[run]\n";
  o << "variant = " << variant_name(variant) << "\n";
  o << "duration = " << d(duration) << "\n";
  o << "dt = " << d(dt) << "\n";
  o << "seed = " << seed << "\n";
  o << "\n[gains]\n";
  o << "k_R = " << d(k_R) << "\nk_p = " << d(k_p) << "\nk_v = " << d(k_v)
    << "\nk_g = " << d(k_g) << "\n";
  o << "\n[timer]\n";
  o << "T_m = " << d(T_m) << "\nT_M = " << d(T_M) << "\n";
  o << "periodic = " << (periodic ? "true" : "false") << "\n";
  if (tau0) o << "tau0 = " << d(*tau0) << "\n";
  o << "\n[noise]\n";
  o << "enabled = " << (noise_enabled ? "true" : "false") << "\n";
  o << "var_omega = " << d(var_omega) << "\nvar_accel = " << d(var_accel)
    << "\nvar_landmark = " << d(var_landmark) << "\n";
  o << "\n[riccati]\n";
  o << "p0 = " << d(p0) << "\nfloor_v = " << d(floor_v) << "\n";
  o << "frozen = " << (frozen ? "true" : "false") << "\n";
  if (!frozen_p.empty()) {
    o << "frozen_p =";
    for (double x : frozen_p) o << " " << d(x);
    o << "\nfrozen_q = " << d(frozen_q) << "\n";
  }
  o << "\n[landmarks]\n";
  o << "source = " << lm_source << "\n";
  o << "count = " << lm_count << "\n";
  o << "box_min = " << v3(lm_box_min) << "\nbox_max = " << v3(lm_box_max)
    << "\n";
  o << "seed = " << lm_seed << "\n";
  if (!lm_file.empty()) o << "file = " << lm_file << "\n";
  o << "\n[world]\n";
  o << "gravity = " << v3(gravity) << "\n";
  o << "\n[init]\n";
  o << "attitude_angle = " << d(att_angle) << "\n";
  o << "attitude_axis = " << v3(att_axis) << "\n";
  o << "p = " << v3(p0_hat) << "\nv = " << v3(v0_hat) << "\ng = " << v3(g0_hat)
    << "\neta = " << v3(eta0) << "\n";
  o << "\n[output]\n";
  o << "dir = " << out_dir << "\n";
  o << "\n[replay]\n";
  o << "imu = " << imu_file << "\nmeas = " << meas_file
    << "\nlandmarks = " << landmarks_file << "\n";
  if (!gt_file.empty()) o << "gt = " << gt_file << "\n";
  o << "\n[certify]\n";
  o << "mu = " << d(cert_mu) << "\n";
  o << "dim = " << certification_dim() << "\n";
  return o.str();
}

} // namespace hinav
