#pragma once

#include <Eigen/Dense>
#include <vector>

#include "iofpg/iof.hpp"

namespace iofpg {

struct PgConfig {
  double eta = 1e-3;        // stepsize; initial trial size under line search
  bool line_search = true;  // backtracking (halve on instability/ascent), Armijo
  double armijo = 1e-4;
  long max_iters = 100000;
  double gap_tol = 1e-10;  // stop when (J - J*)/J* drops below
  double grad_tol = 0.0;   // additional stop on ||grad||_F; 0 disables
  long record_every = 1;
};

struct TraceRecord {
  long iter = 0;
  double J = 0.0;
  double gap = 0.0;  // (J - J*)/J*
  double grad_fro = 0.0;
};

struct PgRun {
  Eigen::MatrixXd K_init;
  Eigen::MatrixXd K_final;
  Eigen::MatrixXd predicted_limit;  // proj_F(K0) + proj_Fperp(K*)
  std::vector<TraceRecord> trace;
  bool converged = false;
  bool stalled = false;  // line search could not find a descent step
  long iters = 0;
  double limit_error = 0.0;  // ||K_final - predicted_limit||_F
  PgConfig config;
};

/// One exact gradient step K - eta * grad J(K). Throws StepRejectedError
/// (carrying the spectral radius) if the result leaves the feasible set.
Eigen::MatrixXd pg_step(const IofProblem& prob, const Eigen::MatrixXd& Sigma0,
                        const Eigen::MatrixXd& K, double eta);

/// Gradient descent on J from a stabilizing K0 until the relative
/// optimality gap (vs. geom.Jstar) falls below cfg.gap_tol.
PgRun run_pg(const IofProblem& prob, const SolutionGeometry& geom,
             const Eigen::MatrixXd& Sigma0, const Eigen::MatrixXd& K0,
             const PgConfig& cfg);

/// Observed per-record contraction factors (J_{i+1}-J*)/(J_i-J*) over the
/// pre-convergence part of a trace, next to the linear-rate bound
///   1 - 2 eta sigma0_min^2 sigma_min(R) / (||Sigma*|| ||S||^2).
struct RateReport {
  std::vector<double> observed;
  double bound = 0.0;
  bool all_within_bound = false;
};

/// Throws DomainError when the trace holds fewer than two records. Records
/// with gap <= gap_floor are treated as converged and excluded.
RateReport rate_certificate(const PgRun& run, const SolutionGeometry& geom,
                            double sigma0_min, double gap_floor = 1e-9);

}  // namespace iofpg
