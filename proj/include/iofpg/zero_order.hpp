#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "iofpg/iof.hpp"

namespace iofpg {

struct RolloutConfig {
  int T = 20;  // cost summed over t = 0..T
  std::uint64_t seed = 0;
};

struct ZoConfig {
  long N = 100000;  // iterations
  double r = 0.2;   // smoothing radius
  double eta = 1e-5;
  RolloutConfig rollout;
  double grad_clip = 1e3;  // Frobenius cap on the estimate; 0 disables
  bool common_random_numbers = false;  // K1/K2 rollouts share warm-up draws
  long record_every = 1;
  double saturation_cap = 1e12;
  double saturation_warn_fraction = 0.1;
};

/// One simulated trajectory with its finite-horizon cost. Columns are
/// indexed by time: column j corresponds to t = j - p (warm-up first).
struct Rollout {
  Eigen::MatrixXd inputs;   // m x (p + T + 1)
  Eigen::MatrixXd outputs;  // d x (p + T + 1)
  Eigen::MatrixXd states;   // n x (p + T + 1), retained for testing
  double cost = 0.0;
  bool saturated = false;
};

/// Warm-up sampling: x_{-p} ~ N(0,I), u_t ~ N(0,I) for t in {-p..-1},
/// then u_t = -K z_{t,p} for t in {0..T}; cost = sum y'Qy + u'Ru over
/// t = 0..T. An exploding trajectory is truncated with the cost capped at
/// saturation_cap and flagged.
Rollout simulate_rollout(const IofProblem& prob, const Eigen::MatrixXd& K, int T,
                         std::uint64_t seed, double saturation_cap = 1e12);

/// Same protocol for a static output-feedback gain: u_t = -Ks y_t after
/// the warm-up.
Rollout simulate_rollout_sof(const IofProblem& prob, const Eigen::MatrixXd& Ks, int T,
                             std::uint64_t seed, double saturation_cap = 1e12);

/// Covariance of x_0 induced by the warm-up process: Cp Cp' + A^p (A^p)'.
Eigen::MatrixXd warmup_covariance(const IofProblem& prob);

/// Two-point gradient estimate around K along a unit-Frobenius-norm
/// direction U: evaluates cost at K +- r sqrt(D) U (D = #entries of K) and
/// returns sqrt(D)/(2r) (J1 - J2) U, whose sphere average is grad J + O(r^2).
Eigen::MatrixXd two_point_estimate(const std::function<double(const Eigen::MatrixXd&)>& cost,
                                   const Eigen::MatrixXd& K, double r,
                                   const Eigen::MatrixXd& U);

struct ZoTraceRecord {
  long iter = 0;
  double J = 0.0;     // exact model-based cost of the iterate; NaN if unknown
  double gap = 0.0;   // (J - J*)/J*; NaN if unknown, +inf if unstable
  double grad_fro = 0.0;
  double J_hat = 0.0;  // mean of the two rollout costs this iteration
  bool saturated = false;
};

struct ZoRun {
  Eigen::MatrixXd K_init;
  Eigen::MatrixXd K_final;
  std::vector<ZoTraceRecord> trace;
  long n_saturated = 0;  // saturated rollouts over the whole run
  bool divergence_warning = false;
  ZoConfig config;
};

/// Algorithm: per iteration sample U on the unit sphere, roll out the two
/// perturbed gains with fresh warm-up seeds, form the two-point estimate
/// (clipped to cfg.grad_clip) and step. When geom is given, the exact cost
/// and gap of each recorded iterate are evaluated with the model.
ZoRun run_zero_order(const IofProblem& prob, const Eigen::MatrixXd& K0,
                     const ZoConfig& cfg, const SolutionGeometry* geom = nullptr);

/// The same loop over static output-feedback gains (m x d search space).
ZoRun run_zero_order_sof(const IofProblem& prob, const Eigen::MatrixXd& Ks0,
                         const ZoConfig& cfg, const SolutionGeometry* geom = nullptr);

}  // namespace iofpg
