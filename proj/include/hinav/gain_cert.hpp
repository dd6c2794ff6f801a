#pragma once

#include <string>
#include <vector>

#include "hinav/types.hpp"

namespace hinav {

/// Fixed-gain certification problem: find P > 0 with
///   Xi_P(tau) = A_g^T Phi(tau)^T P Phi(tau) A_g - P < 0
/// for every tau in [T_m, T_M], where Phi(tau) = exp(A tau) and
/// A_g = I - K C.
struct CertProblem {
  int dim = 6; ///< 6 (known gravity) or 9 (estimated gravity)
  double k_p = 0.5;
  double k_v = 1.0;
  double k_g = 0.6; ///< used only when dim == 9
  double T_m = 0.04;
  double T_M = 0.06;
  double mu = 1e-4;          ///< certification margin
  double ap_tol = 1e-8;      ///< alternating-projection tolerance
  int ap_max_iter = 5000;    ///< alternating-projection iteration cap
  int max_refine = 25;       ///< Step-2/Step-3 refinement rounds
  double pbar_max = 1e7;     ///< give up above this conditioning bound
  double pbar_rel_tol = 1e-2;///< bisection width for minimizing pbar
  bool use_generic_exp_bound = false; ///< Step-1 route instead of closed form
};

struct GridPoint {
  double tau = 0.0;
  double lambda_max = 0.0;
};

struct CertificationResult {
  bool feasible = false;
  MatX P;             ///< certified P (full dimension) when feasible
  double pbar = 0.0;  ///< I <= P <= pbar I
  double margin = 0.0;///< certified bound: lambda_max(Xi(tau)) <= -margin
  std::vector<GridPoint> grid; ///< Step-3 evidence grid
  int iterations = 0;          ///< refinement rounds used
  std::string reason;          ///< failure explanation when infeasible
};

/// Closed-form transition matrix exp(A tau); A is nilpotent so the series
/// terminates (I + A tau for dim 6, plus A^2 tau^2 / 2 for dim 9).
MatX phi(double tau, int dim);

/// Nilpotent flow matrix A (constant-gain error dynamics).
MatX a_nilpotent(int dim);

/// Column gain K = [k_p I; k_v I] or [k_p I; k_v I; k_g I].
MatX gain_matrix(double k_p, double k_v, double k_g, int dim);

/// Xi_P(tau) for the given P and K.
MatX xi(const MatX& P, double tau, const MatX& K, int dim);

/// Step-1 exponential bound on ||exp(A tau)|| over [0, T_M].
struct ExpBound {
  double c_exact = 0.0;   ///< sup of the closed-form operator norm
  double c_generic = 0.0; ///< gamma * exp(beta T_M) from the Lyapunov route
  double beta = 0.0;
  MatX Pi;
};
ExpBound exp_bound(int dim, double T_M);

/// Step-2 finite LMI problem on a discrete tau set: minimize pbar subject
/// to I <= P <= pbar I and Xi_P(tau) <= -2 mu I for all tau in the set.
/// Solved by alternating projections on the Kronecker-reduced system with
/// bisection on pbar.
struct LmiSolution {
  bool found = false;
  MatX P;           ///< full-dimension solution
  double pbar = 0.0;
  int iterations = 0;
  std::string reason;
};
LmiSolution lmi_feasibility(const std::vector<double>& tau_set, const MatX& K,
                            int dim, double mu, double tol = 1e-8,
                            int max_iter = 5000, double pbar_max = 1e7,
                            double pbar_rel_tol = 1e-2);

/// Full Step-1/2/3 certification loop.
CertificationResult certify(const CertProblem& problem);

/// lambda_max(Xi_P(tau)) for every tau in the grid. The parallel kernel
/// and the serial reference produce identical results (each grid point is
/// independent).
std::vector<double> sweep_lambda_max_serial(const MatX& P, const MatX& K,
                                            int dim,
                                            const std::vector<double>& taus);
std::vector<double> sweep_lambda_max_parallel(const MatX& P, const MatX& K,
                                              int dim,
                                              const std::vector<double>& taus);

/// Uniformly spaced grid over [lo, hi] with n >= 2 points.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

/// Kronecker inflation B (x) I3 used to lift reduced certificates back to
/// full dimension.
MatX kron_identity3(const MatX& B);

} // namespace hinav
