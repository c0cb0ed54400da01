#pragma once

#include <filesystem>

#include "iofpg/rng.hpp"
#include "iofpg/serialize.hpp"
#include "iofpg/sof.hpp"

namespace iofpg {

/// Random Gaussian gain rescaled (by bisection on the scale factor) so the
/// closed loop A - B K Sdag has exactly the requested spectral radius.
/// Requires the open loop to be strictly inside that radius.
Eigen::MatrixXd normalized_random_gain(const IofProblem& prob, double target_rho,
                                       Rng& rng);

/// Pearson correlation between iteration index and log10(gap) over the
/// records with gap > floor_gap (the pre-convergence segment).
double log_gap_iteration_correlation(const std::vector<TraceRecord>& trace,
                                     double floor_gap);

/// Diagnostics for a candidate system: standing assumptions, structural
/// indices, state recovery, optimal-gain residual, gradient-dominance spot
/// checks. Works on raw JSON so assumption violations are reported rather
/// than thrown. Returns {passed, p, q, checks: [{name, passed, detail}]}.
json run_check(const json& system_json);

struct Fig2Options {
  int trials = 20;
  double eta = 1e-3;
  long max_iters = 30000;
  double gap_tol = 1e-6;
  double init_rho = 0.8;
  long record_every = 1;
  std::uint64_t seed = 1;
};

/// Model-based convergence study: per-trial gap traces (CSV) plus an
/// aligned mean/variance trace and a summary JSON. Sigma0 = I.
json run_fig2(const IofProblem& prob, const std::filesystem::path& out_dir,
              const Fig2Options& opt);

struct Fig3Options {
  int trials = 20;
  long N = 100000;
  double eta = 1e-5;
  double r = 0.2;
  int T = 20;
  double grad_clip = 1e3;
  long record_every = 10;
  std::uint64_t seed = 1;
};

/// Sample-based convergence study from K0 = 0 under the warm-up initial
/// covariance; traces carry both empirical and exact-gap columns.
json run_fig3(const IofProblem& prob, const std::filesystem::path& out_dir,
              const Fig3Options& opt);

struct Table1Options {
  int trials = 20;
  long iters = 100000;
  double eta = 1e-5;
  int T = 20;
  double r = 0.2;
  double grad_clip = 1e3;
  std::uint64_t seed = 1;
};

/// Optimal/IOF/SOF average final costs over trials for the d=2 and d=4
/// benchmark plants, in the model-based and sample-based regimes.
json run_table1(const IofProblem& prob_d2, const IofProblem& prob_d4,
                const std::filesystem::path& out_dir, const Table1Options& opt);

/// Runs fn(trial) for trial in [0, trials) on a small thread pool;
/// exceptions are rethrown on the caller thread.
void parallel_trials(int trials, const std::function<void(int)>& fn);

}  // namespace iofpg
