#include "hinav/metrics.hpp"

#include <cmath>

#include "hinav/so3.hpp"

namespace hinav {

double lyapunov_mu_threshold(const Mat3& M, double T_M) {
  const Mat3 Mb = so3::mbar(M);
  const Mat3 Wp = (Mb * Mb).trace() * Mat3::Identity() - 2.0 * Mb * Mb;
  const Mat3 Wb = so3::mbar(Wp);
  Eigen::SelfAdjointEigenSolver<Mat3> es_m(Mb), es_w(Wb);
  const double lam_m_mbar = es_m.eigenvalues()(0);
  const double lam_max_wbar = es_w.eigenvalues()(2);
  return std::max(0.5 * lam_max_wbar * T_M * T_M / lam_m_mbar,
                  T_M * Mb.norm());
}

double lyapunov_w(const Mat3& R_tilde, const Vec3& eta, double tau,
                  const Mat3& M, double mu_w, double T_M) {
  if (!(mu_w > lyapunov_mu_threshold(M, T_M))) {
    throw MuTooSmall("lyapunov_w: mu_w must exceed the admissible threshold");
  }
  const double quad = 0.5 * ((Mat3::Identity() - R_tilde) * M).trace();
  const double cross = tau * eta.dot(so3::psi(M * R_tilde));
  return quad - cross + mu_w * std::exp(tau) * eta.squaredNorm();
}

ConvergenceReport convergence_stats(const std::vector<double>& t,
                                    const std::vector<double>& value,
                                    double settle_frac, double threshold,
                                    double fit_start_time) {
  if (t.empty() || t.size() != value.size()) {
    throw Error("convergence_stats: empty or mismatched trace");
  }
  ConvergenceReport rep;

  for (std::size_t i = 0; i < t.size(); ++i) {
    if (value[i] < threshold) {
      rep.time_to_threshold = t[i];
      break;
    }
  }

  const std::size_t n = t.size();
  const std::size_t n_tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(settle_frac * double(n))));
  double acc = 0.0;
  for (std::size_t i = n - n_tail; i < n; ++i) acc += value[i] * value[i];
  rep.steady_rms = std::sqrt(acc / double(n_tail));

  // Decay segment: from fit_start_time down to 1e3x the steady floor.
  const double floor_level = std::max(rep.steady_rms * 1e3, 1e-300);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] < fit_start_time) continue;
    if (value[i] <= floor_level) break;
    if (value[i] > 0.0) {
      xs.push_back(t[i]);
      ys.push_back(std::log(value[i]));
    }
  }
  if (xs.size() < 3) return rep; // nothing to fit (already settled or zero)

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  const double m = double(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) return rep;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / m;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fit = slope * xs[i] + intercept;
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  rep.rate_applicable = true;
  rep.decay_rate = -slope;
  rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  rep.fit_t_begin = xs.front();
  rep.fit_t_end = xs.back();
  return rep;
}

} // namespace hinav
