#include "hinav/gain_cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hinav {
namespace {

void check_dim(int dim) {
  if (dim != 6 && dim != 9) throw Error("gain_cert: dim must be 6 or 9");
}

// ---- reduced (Kronecker) system -----------------------------------------
// A = Ahat (x) I3, C = Chat (x) I3 and K = Khat (x) I3, so for
// P = Phat (x) I3 the spectrum of Xi_P(tau) equals the spectrum of the
// n x n reduced problem (n = dim/3), each eigenvalue with multiplicity 3.

MatX a_reduced(int n) {
  MatX A = MatX::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  return A;
}

MatX phi_reduced(double tau, int n) {
  MatX F = MatX::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) F(i, i + 1) = tau;
  if (n == 3) F(0, 2) = 0.5 * tau * tau;
  return F;
}

MatX ag_reduced(double k_p, double k_v, double k_g, int n) {
  MatX Ag = MatX::Identity(n, n);
  Ag(0, 0) -= k_p;
  Ag(1, 0) -= k_v;
  if (n == 3) Ag(2, 0) -= k_g;
  return Ag;
}

// scaled symmetric vectorization, <svec(A), svec(B)> = <A, B>_F
VecX svec(const MatX& S) {
  const int n = int(S.rows());
  VecX v(n * (n + 1) / 2);
  int k = 0;
  for (int i = 0; i < n; ++i) v(k++) = S(i, i);
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) v(k++) = r2 * S(i, j);
  return v;
}

MatX smat(const VecX& v, int n) {
  MatX S(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) S(i, i) = v(k++);
  const double r2 = std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      S(i, j) = S(j, i) = v(k++) / r2;
    }
  return S;
}

// matrix of P -> J^T P J - P in svec coordinates
MatX lmap_matrix(const MatX& J) {
  const int n = int(J.rows());
  const int d = n * (n + 1) / 2;
  MatX G(d, d);
  VecX e = VecX::Zero(d);
  for (int k = 0; k < d; ++k) {
    e(k) = 1.0;
    const MatX B = smat(e, n);
    G.col(k) = svec((J.transpose() * B * J - B).eval());
    e(k) = 0.0;
  }
  return G;
}

MatX clamp_eigs(const MatX& S, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<MatX> es(S);
  VecX ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) ev(i) = std::clamp(ev(i), lo, hi);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double lambda_max_sym(const MatX& S) {
  Eigen::SelfAdjointEigenSolver<MatX> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min_sym(const MatX& S) {
  Eigen::SelfAdjointEigenSolver<MatX> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_radius(const MatX& J) {
  Eigen::EigenSolver<MatX> es(J, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct ApOutcome {
  bool feasible = false;
  MatX P; // reduced
  int iterations = 0;
};

// Alternating projections between the affine set {Y_tau = L_tau(P)} and
// the product cone {I <= P <= pbar I} x {Y_tau <= -2 mu I}.
ApOutcome alternating_projections(const std::vector<MatX>& Js, double mu,
                                  double pbar, double tol, int max_iter) {
  const int n = int(Js.front().rows());
  const int d = n * (n + 1) / 2;

  std::vector<MatX> G;
  G.reserve(Js.size());
  MatX H = MatX::Identity(d, d);
  for (const MatX& J : Js) {
    G.push_back(lmap_matrix(J));
    H += G.back().transpose() * G.back();
  }
  const Eigen::LDLT<MatX> Hfact(H);

  MatX P = 0.5 * (1.0 + pbar) * MatX::Identity(n, n);
  std::vector<MatX> Y(Js.size());
  for (std::size_t i = 0; i < Js.size(); ++i) {
    Y[i] = Js[i].transpose() * P * Js[i] - P;
  }

  const double tol_abs = tol * std::max(1.0, pbar);
  ApOutcome out;
  for (int it = 0; it < max_iter; ++it) {
    // project onto the cone product
    const MatX Pc = clamp_eigs(P, 1.0, pbar);
    std::vector<MatX> Yc(Y.size());
    for (std::size_t i = 0; i < Y.size(); ++i) {
      Yc[i] = clamp_eigs(Y[i], -std::numeric_limits<double>::infinity(),
                         -2.0 * mu);
    }
    // project onto the affine set
    VecX rhs = svec(Pc);
    for (std::size_t i = 0; i < Y.size(); ++i) {
      rhs += G[i].transpose() * svec(Yc[i]);
    }
    const VecX p = Hfact.solve(rhs);
    P = smat(p, n);
    double viol = std::max(1.0 - lambda_min_sym(P),
                           lambda_max_sym(P) - pbar);
    for (std::size_t i = 0; i < Js.size(); ++i) {
      Y[i] = Js[i].transpose() * P * Js[i] - P;
      viol = std::max(viol, lambda_max_sym(Y[i]) + 2.0 * mu);
    }
    out.iterations = it + 1;
    if (viol <= tol_abs) {
      out.feasible = true;
      // tidy the box constraint exactly; the Xi slack absorbs tol_abs
      out.P = clamp_eigs(P, 1.0, pbar);
      return out;
    }
  }
  return out;
}

} // namespace

MatX a_nilpotent(int dim) {
  check_dim(dim);
  return kron_identity3(a_reduced(dim / 3));
}

MatX phi(double tau, int dim) {
  check_dim(dim);
  if (tau < 0.0) throw Error("phi: tau must be >= 0");
  return kron_identity3(phi_reduced(tau, dim / 3));
}

MatX gain_matrix(double k_p, double k_v, double k_g, int dim) {
  check_dim(dim);
  MatX K = MatX::Zero(dim, 3);
  K.block<3, 3>(0, 0) = k_p * Mat3::Identity();
  K.block<3, 3>(3, 0) = k_v * Mat3::Identity();
  if (dim == 9) K.block<3, 3>(6, 0) = k_g * Mat3::Identity();
  return K;
}

MatX xi(const MatX& P, double tau, const MatX& K, int dim) {
  check_dim(dim);
  MatX Ag = MatX::Identity(dim, dim);
  Ag.leftCols(3) -= K; // I - K C with C = [I 0 ...]
  const MatX F = phi(tau, dim);
  MatX X = Ag.transpose() * F.transpose() * P * F * Ag - P;
  return 0.5 * (X + X.transpose());
}

MatX kron_identity3(const MatX& B) {
  MatX out = MatX::Zero(3 * B.rows(), 3 * B.cols());
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j)
      out.block<3, 3>(3 * i, 3 * j) = B(i, j) * Mat3::Identity();
  return out;
}

ExpBound exp_bound(int dim, double T_M) {
  check_dim(dim);
  if (!(T_M > 0.0)) throw Error("exp_bound: T_M must be > 0");
  const int n = dim / 3;
  ExpBound out;

  // closed form: ||Phi(tau)|| is monotone in tau for this nilpotent A
  // (entrywise nonnegative and nondecreasing); scan a grid defensively.
  double sup = 0.0;
  for (double tau : uniform_grid(0.0, T_M, 201)) {
    Eigen::JacobiSVD<MatX> svd(phi_reduced(tau, n));
    sup = std::max(sup, svd.singularValues()(0));
  }
  out.c_exact = sup;

  // generic route: Pi = I and beta just above lambda_max(sym(A)) satisfy
  // (-A + beta I)^T Pi + Pi (-A + beta I) > 0, gamma = 1.
  const MatX A = a_reduced(n);
  const MatX symA = 0.5 * (A + A.transpose());
  const double beta = lambda_max_sym(symA) + 1e-3;
  out.beta = beta;
  out.Pi = MatX::Identity(n, n);
  const MatX check =
      (-A + beta * MatX::Identity(n, n)).transpose() * out.Pi +
      out.Pi * (-A + beta * MatX::Identity(n, n));
  if (lambda_min_sym(check) <= 0.0) {
    throw Error("exp_bound: Step-1 Lyapunov inequality infeasible");
  }
  out.c_generic = std::exp(beta * T_M);
  return out;
}

LmiSolution lmi_feasibility(const std::vector<double>& tau_set, const MatX& K,
                            int dim, double mu, double tol, int max_iter,
                            double pbar_max, double pbar_rel_tol) {
  check_dim(dim);
  if (tau_set.empty()) throw Error("lmi_feasibility: empty tau set");
  if (!(mu > 0.0)) throw Error("lmi_feasibility: mu must be > 0");
  const int n = dim / 3;
  const double k_p = K(0, 0);
  const double k_v = K(3, 0);
  const double k_g = dim == 9 ? K(6, 0) : 0.0;
  const MatX Ag = ag_reduced(k_p, k_v, k_g, n);

  LmiSolution sol;

  std::vector<MatX> Js;
  Js.reserve(tau_set.size());
  for (double tau : tau_set) {
    const MatX J = phi_reduced(tau, n) * Ag;
    if (spectral_radius(J) >= 1.0) {
      sol.reason = "gain leaves an eigenvalue of Phi(tau)(I-KC) outside the "
                   "unit circle at tau = " +
                   std::to_string(tau);
      return sol;
    }
    Js.push_back(J);
  }

  // exponential search for a feasible pbar, then bisection to minimize it
  double lo = 1.0;
  double hi = 4.0;
  ApOutcome best;
  int total_iters = 0;
  while (true) {
    ApOutcome r = alternating_projections(Js, mu, hi, tol, max_iter);
    total_iters += r.iterations;
    if (r.feasible) {
      best = r;
      break;
    }
    lo = hi;
    hi *= 4.0;
    if (hi > pbar_max) {
      sol.reason = "no P with I <= P <= " + std::to_string(pbar_max) +
                   " I satisfies the sampled constraints";
      sol.iterations = total_iters;
      return sol;
    }
  }
  double pbar = hi;
  while ((hi - lo) > pbar_rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    ApOutcome r = alternating_projections(Js, mu, mid, tol, max_iter);
    total_iters += r.iterations;
    if (r.feasible) {
      best = r;
      hi = mid;
      pbar = mid;
    } else {
      lo = mid;
    }
  }

  sol.found = true;
  sol.P = kron_identity3(best.P);
  sol.pbar = pbar;
  sol.iterations = total_iters;
  return sol;
}

namespace {

double lambda_max_xi_at(const MatX& P, const MatX& K, int dim, double tau) {
  return lambda_max_sym(xi(P, tau, K, dim));
}

} // namespace

std::vector<double> sweep_lambda_max_serial(const MatX& P, const MatX& K,
                                            int dim,
                                            const std::vector<double>& taus) {
  std::vector<double> out(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    out[i] = lambda_max_xi_at(P, K, dim, taus[i]);
  }
  return out;
}

std::vector<double> sweep_lambda_max_parallel(const MatX& P, const MatX& K,
                                              int dim,
                                              const std::vector<double>& taus) {
  std::vector<double> out(taus.size());
#ifdef HINAV_HAVE_OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(taus.size()); ++i) {
    out[i] = lambda_max_xi_at(P, K, dim, taus[i]);
  }
#else
  out = sweep_lambda_max_serial(P, K, dim, taus);
#endif
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi >= lo)) throw Error("uniform_grid: bad arguments");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * double(i) / double(n - 1);
  }
  return g;
}

CertificationResult certify(const CertProblem& problem) {
  check_dim(problem.dim);
  if (!(problem.T_m > 0.0) || problem.T_m > problem.T_M) {
    throw Error("certify: need 0 < T_m <= T_M");
  }
  if (!(problem.mu > 0.0)) throw Error("certify: mu must be > 0");

  const int dim = problem.dim;
  const MatX K = gain_matrix(problem.k_p, problem.k_v, problem.k_g, dim);
  MatX Ag = MatX::Identity(dim, dim);
  Ag.leftCols(3) -= K;
  const MatX A = a_nilpotent(dim);
  const double norm_A = A.jacobiSvd().singularValues()(0);
  const double norm_Ag = Ag.jacobiSvd().singularValues()(0);

  const ExpBound bound = exp_bound(dim, problem.T_M);
  const double c_A =
      problem.use_generic_exp_bound ? bound.c_generic : bound.c_exact;

  CertificationResult res;
  std::vector<double> tau_set = {problem.T_m};
  if (problem.T_M > problem.T_m) tau_set.push_back(problem.T_M);

  for (int round = 0; round < problem.max_refine; ++round) {
    res.iterations = round + 1;
    const LmiSolution sol =
        lmi_feasibility(tau_set, K, dim, problem.mu, problem.ap_tol,
                        problem.ap_max_iter, problem.pbar_max,
                        problem.pbar_rel_tol);
    if (!sol.found) {
      res.feasible = false;
      res.reason = "LMI infeasible: " + sol.reason;
      return res;
    }

    // Step 3: eigenvalue check on the Lipschitz-justified grid.
    const double lipschitz = 2.0 * sol.pbar * c_A * c_A * norm_A * norm_Ag *
                             norm_Ag; // bound on |d lambda / d tau|
    const double delta = problem.mu / lipschitz;
    std::size_t n_grid =
        problem.T_M > problem.T_m
            ? static_cast<std::size_t>(
                  std::ceil((problem.T_M - problem.T_m) / (2.0 * delta))) +
                  2
            : 2;
    n_grid = std::min<std::size_t>(std::max<std::size_t>(n_grid, 2), 4000000);
    const std::vector<double> grid =
        uniform_grid(problem.T_m, problem.T_M, n_grid);
    const std::vector<double> lam =
        sweep_lambda_max_parallel(sol.P, K, dim, grid);

    std::size_t worst = 0;
    for (std::size_t i = 1; i < lam.size(); ++i) {
      if (lam[i] > lam[worst]) worst = i;
    }
    // Between grid points lambda_max can grow by at most
    // lipschitz * (half grid spacing); by construction that slack is <= mu
    // unless the grid-size cap was hit.
    const double half_spacing =
        grid.size() > 1 ? 0.5 * (problem.T_M - problem.T_m) /
                              double(grid.size() - 1)
                        : 0.0;
    const double slack = lipschitz * half_spacing;
    if (lam[worst] < -problem.mu && lam[worst] + slack < 0.0) {
      res.feasible = true;
      res.P = sol.P;
      res.pbar = sol.pbar;
      res.margin = -(lam[worst] + slack);
      res.grid.reserve(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        res.grid.push_back({grid[i], lam[i]});
      }
      return res;
    }
    tau_set.push_back(grid[worst]);
    std::sort(tau_set.begin(), tau_set.end());
  }
  res.feasible = false;
  res.reason = "refinement rounds exhausted before the grid check passed";
  return res;
}

} // namespace hinav
