#pragma once

#include <optional>
#include <vector>

#include "hinav/types.hpp"

namespace hinav {

/// One row of an error trace.
struct ErrorSample {
  double t = 0.0;
  double rot = 0.0;                ///< |R~|_I
  double pos = 0.0;                ///< ||p~|| [m]
  double vel = 0.0;                ///< ||v~|| [m/s]
  std::optional<double> grav;      ///< ||g~|| [m/s^2] when estimated
  bool event = false;
};
using ErrorTrace = std::vector<ErrorSample>;

/// Smallest admissible weight for the hybrid storage function:
///   mu > max{ 0.5 lambda_max(Wbar) T_M^2 / lambda_min(Mbar),
///             T_M ||Mbar||_F }
/// with W' = tr(Mbar^2) I - 2 Mbar^2 and Wbar = 0.5 (tr(W') I - W').
double lyapunov_mu_threshold(const Mat3& M, double T_M);

/// Storage function
///   W = 0.5 tr((I - R~) M) - tau eta^T psi(M R~) + mu e^tau eta^T eta.
/// Throws MuTooSmall when mu_w is not above the admissible threshold
/// (pass T_M to validate; tau <= T_M is assumed).
double lyapunov_w(const Mat3& R_tilde, const Vec3& eta, double tau,
                  const Mat3& M, double mu_w, double T_M);

struct ConvergenceReport {
  double time_to_threshold = -1.0; ///< -1 when never reached
  double steady_rms = 0.0;         ///< RMS over the trailing settle window
  bool rate_applicable = false;
  double decay_rate = 0.0;         ///< fitted exponent of e^{-rate t}
  double r_squared = 0.0;          ///< R^2 of the log-linear fit
  double fit_t_begin = 0.0;
  double fit_t_end = 0.0;
};

/// Scalar convergence statistics: time to fall below `threshold`,
/// steady-state RMS over the last `settle_frac` of the run, and a
/// log-linear least-squares decay fit over the decay segment (from the
/// first event until the signal reaches 1e3x its steady floor).
ConvergenceReport convergence_stats(const std::vector<double>& t,
                                    const std::vector<double>& value,
                                    double settle_frac, double threshold,
                                    double fit_start_time = 0.0);

} // namespace hinav
