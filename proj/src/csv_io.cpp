#include "hinav/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hinav/so3.hpp"

namespace hinav {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_field(const std::string& s, const std::string& path, int row) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw MalformedRow(path + ": row " + std::to_string(row) +
                       ": bad number '" + s + "'");
  }
  return v;
}

void expect_header(std::ifstream& f, const std::string& expected,
                   const std::string& path) {
  std::string line;
  if (!std::getline(f, line)) throw MalformedRow(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) {
    throw MalformedRow(path + ": expected header '" + expected + "', got '" +
                       line + "'");
  }
}

struct RowReader {
  std::ifstream f;
  std::string path;
  int row = 1; // header consumed
  bool next(std::vector<std::string>& fields, std::size_t n_expected) {
    std::string line;
    while (std::getline(f, line)) {
      ++row;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_csv(line);
      if (fields.size() != n_expected) {
        throw MalformedRow(path + ": row " + std::to_string(row) + ": got " +
                           std::to_string(fields.size()) + " fields, want " +
                           std::to_string(n_expected));
      }
      return true;
    }
    return false;
  }
};

} // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Eigen::Vector4d quat_from_rotation(const Mat3& R) {
  Eigen::Quaterniond q(R);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
}

Mat3 rotation_from_quat(const Eigen::Vector4d& q) {
  Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  if (quat.norm() == 0.0) throw MalformedRow("zero quaternion");
  quat.normalize();
  return quat.toRotationMatrix();
}

void write_imu_csv(const std::string& path, const std::vector<ImuSample>& imu) {
  auto f = open_out(path);
  f << "t,wx,wy,wz,ax,ay,az\n";
  for (const auto& s : imu) {
    f << format_double(s.t);
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.omega(i));
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.accel(i));
    f << '\n';
  }
}

void write_landmarks_csv(const std::string& path, const LandmarkSet& lm) {
  auto f = open_out(path);
  f << "id,px,py,pz,weight\n";
  for (std::size_t i = 0; i < lm.size(); ++i) {
    f << i;
    for (int a = 0; a < 3; ++a) f << ',' << format_double(lm.positions[i](a));
    f << ',' << format_double(lm.weights[i]) << '\n';
  }
}

void write_meas_csv(const std::string& path, const SimData& data) {
  auto f = open_out(path);
  f << "t,id,yx,yy,yz\n";
  for (const auto& m : data.meas) {
    if (!m) continue;
    for (const auto& [id, y] : m->values) {
      f << format_double(m->t) << ',' << id;
      for (int a = 0; a < 3; ++a) f << ',' << format_double(y(a));
      f << '\n';
    }
  }
}

void write_gt_csv(const std::string& path, const std::vector<TrueState>& gt) {
  auto f = open_out(path);
  f << "t,qw,qx,qy,qz,px,py,pz,vx,vy,vz\n";
  for (const auto& s : gt) {
    const Eigen::Vector4d q = quat_from_rotation(s.R);
    f << format_double(s.t);
    for (int i = 0; i < 4; ++i) f << ',' << format_double(q(i));
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.p(i));
    for (int i = 0; i < 3; ++i) f << ',' << format_double(s.v(i));
    f << '\n';
  }
}

void write_est_csv(const std::string& path, const RunResult& result,
                   bool with_gravity) {
  auto f = open_out(path);
  f << "t,qw,qx,qy,qz,px,py,pz,vx,vy,vz,ex,ey,ez";
  if (with_gravity) f << ",gx,gy,gz";
  f << '\n';
  for (const auto& rec : result.steps) {
    const Eigen::Vector4d q = quat_from_rotation(rec.R_hat);
    f << format_double(rec.t);
    for (int i = 0; i < 4; ++i) f << ',' << format_double(q(i));
    for (int i = 0; i < 3; ++i) f << ',' << format_double(rec.p_hat(i));
    for (int i = 0; i < 3; ++i) f << ',' << format_double(rec.v_hat(i));
    for (int i = 0; i < 3; ++i) f << ',' << format_double(rec.eta(i));
    if (with_gravity) {
      for (int i = 0; i < 3; ++i) f << ',' << format_double(rec.g_hat(i));
    }
    f << '\n';
  }
}

void write_errors_csv(const std::string& path, const ErrorTrace& trace) {
  auto f = open_out(path);
  f << "t,rot_err,pos_err,vel_err,grav_err,event\n";
  for (const auto& e : trace) {
    f << format_double(e.t) << ',' << format_double(e.rot) << ','
      << format_double(e.pos) << ',' << format_double(e.vel) << ','
      << format_double(e.grav ? *e.grav : std::nan("")) << ','
      << (e.event ? 1 : 0) << '\n';
  }
}

void write_diag_csv(const std::string& path, const RunResult& result) {
  auto f = open_out(path);
  f << "t,p_eig_min,p_eig_max,gain_norm\n";
  for (const auto& rec : result.steps) {
    if (!rec.event) continue;
    f << format_double(rec.t) << ',' << format_double(rec.p_eig_min) << ','
      << format_double(rec.p_eig_max) << ',' << format_double(rec.gain_norm)
      << '\n';
  }
}

std::vector<ImuSample> read_imu_csv(const std::string& path) {
  RowReader r{open_in(path), path};
  expect_header(r.f, "t,wx,wy,wz,ax,ay,az", path);
  std::vector<ImuSample> out;
  std::vector<std::string> fields;
  while (r.next(fields, 7)) {
    ImuSample s;
    s.t = parse_field(fields[0], path, r.row);
    for (int i = 0; i < 3; ++i) s.omega(i) = parse_field(fields[1 + i], path, r.row);
    for (int i = 0; i < 3; ++i) s.accel(i) = parse_field(fields[4 + i], path, r.row);
    if (!out.empty() && s.t <= out.back().t) {
      throw NonMonotoneTime(path + ": row " + std::to_string(r.row) +
                            ": timestamps must strictly increase");
    }
    out.push_back(s);
  }
  return out;
}

LandmarkSet read_landmarks_csv(const std::string& path) {
  RowReader r{open_in(path), path};
  expect_header(r.f, "id,px,py,pz,weight", path);
  std::map<int, std::pair<Vec3, double>> rows;
  std::vector<std::string> fields;
  while (r.next(fields, 5)) {
    const int id = static_cast<int>(parse_field(fields[0], path, r.row));
    Vec3 p;
    for (int a = 0; a < 3; ++a) p(a) = parse_field(fields[1 + a], path, r.row);
    const double w = parse_field(fields[4], path, r.row);
    if (!(w > 0.0)) {
      throw MalformedRow(path + ": row " + std::to_string(r.row) +
                         ": weight must be > 0");
    }
    if (!rows.emplace(id, std::make_pair(p, w)).second) {
      throw MalformedRow(path + ": row " + std::to_string(r.row) +
                         ": duplicate landmark id " + std::to_string(id));
    }
  }
  LandmarkSet lm;
  double sum = 0.0;
  int expect = 0;
  for (const auto& [id, pw] : rows) {
    if (id != expect++) {
      throw MalformedRow(path + ": landmark ids must be 0..N-1 (missing " +
                         std::to_string(expect - 1) + ")");
    }
    lm.positions.push_back(pw.first);
    lm.weights.push_back(pw.second);
    sum += pw.second;
  }
  // renormalize on load; already-normalized weights are kept bit-identical
  // so that a written set replays exactly
  if (std::abs(sum - 1.0) > 1e-12) {
    for (double& w : lm.weights) w /= sum;
  }
  return lm;
}

std::vector<LandmarkMeasurement> read_meas_csv(const std::string& path) {
  RowReader r{open_in(path), path};
  expect_header(r.f, "t,id,yx,yy,yz", path);
  std::vector<LandmarkMeasurement> out;
  std::vector<std::string> fields;
  while (r.next(fields, 5)) {
    const double t = parse_field(fields[0], path, r.row);
    const int id = static_cast<int>(parse_field(fields[1], path, r.row));
    Vec3 y;
    for (int a = 0; a < 3; ++a) y(a) = parse_field(fields[2 + a], path, r.row);
    if (out.empty() || out.back().t != t) {
      if (!out.empty() && t < out.back().t) {
        throw NonMonotoneTime(path + ": row " + std::to_string(r.row) +
                              ": timestamps must be non-decreasing");
      }
      out.push_back(LandmarkMeasurement{t, {}});
    }
    out.back().values.emplace_back(id, y);
  }
  return out;
}

std::vector<TrueState> read_gt_csv(const std::string& path) {
  RowReader r{open_in(path), path};
  expect_header(r.f, "t,qw,qx,qy,qz,px,py,pz,vx,vy,vz", path);
  std::vector<TrueState> out;
  std::vector<std::string> fields;
  while (r.next(fields, 11)) {
    TrueState s;
    s.t = parse_field(fields[0], path, r.row);
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) q(i) = parse_field(fields[1 + i], path, r.row);
    s.R = rotation_from_quat(q);
    for (int i = 0; i < 3; ++i) s.p(i) = parse_field(fields[5 + i], path, r.row);
    for (int i = 0; i < 3; ++i) s.v(i) = parse_field(fields[8 + i], path, r.row);
    if (!out.empty() && s.t <= out.back().t) {
      throw NonMonotoneTime(path + ": row " + std::to_string(r.row) +
                            ": timestamps must strictly increase");
    }
    out.push_back(s);
  }
  return out;
}

SimData assemble_replay(std::vector<ImuSample> imu,
                        const std::vector<LandmarkMeasurement>& meas,
                        LandmarkSet lm, std::vector<TrueState> gt,
                        const Vec3& gravity) {
  if (imu.empty()) throw MalformedRow("replay: empty IMU stream");
  lm.validate();
  SimData data;
  data.gravity = gravity;
  data.meas.resize(imu.size());
  if (!gt.empty()) {
    if (gt.size() != imu.size()) {
      throw MalformedRow("replay: gt.csv must align with the IMU grid (" +
                         std::to_string(gt.size()) + " vs " +
                         std::to_string(imu.size()) + " rows)");
    }
    data.truth = std::move(gt);
  }
  double dt_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < imu.size(); ++k) {
    dt_min = std::min(dt_min, imu[k].t - imu[k - 1].t);
  }
  data.dt = imu.size() > 1 ? dt_min : 0.0;

  std::size_t k = 0;
  for (const auto& m : meas) {
    for (const auto& [id, y] : m.values) {
      (void)y;
      if (id < 0 || static_cast<std::size_t>(id) >= lm.size()) {
        throw UnknownLandmarkId("replay: meas.csv references landmark " +
                                std::to_string(id) +
                                " absent from landmarks.csv");
      }
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(m.t));
    while (k < imu.size() && imu[k].t < m.t - tol) ++k;
    if (k >= imu.size() || std::abs(imu[k].t - m.t) > tol) {
      throw MalformedRow("replay: measurement at t=" + format_double(m.t) +
                         " does not land on the IMU grid");
    }
    data.meas[k] = m;
  }
  data.imu = std::move(imu);
  data.landmarks = std::move(lm);
  return data;
}

ErrorTrace error_trace(const RunResult& result) {
  ErrorTrace trace;
  trace.reserve(result.steps.size());
  for (const auto& rec : result.steps) {
    if (!rec.error) continue;
    ErrorSample e;
    e.t = rec.t;
    e.rot = so3::dist_identity(rec.error->R_tilde);
    e.pos = rec.error->p_tilde.norm();
    e.vel = rec.error->v_tilde.norm();
    if (rec.error->g_tilde) e.grav = rec.error->g_tilde->norm();
    e.event = rec.event;
    trace.push_back(e);
  }
  return trace;
}

} // namespace hinav
