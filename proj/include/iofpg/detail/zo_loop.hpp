#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>

#include "iofpg/rng.hpp"
#include "iofpg/zero_order.hpp"

namespace iofpg::detail {

// Two-point zero-order loop shared by the IOF and SOF parameterizations.
// RolloutCost maps (gain, seed) to (cost, saturated); ExactEval maps a gain
// to (J, gap) with NaN entries when the model is unavailable.
template <typename RolloutCost, typename ExactEval>
ZoRun zo_loop(const Eigen::MatrixXd& K0, const ZoConfig& cfg, RolloutCost&& rollout_cost,
              ExactEval&& exact_eval) {
  if (cfg.r <= 0.0) throw DomainError("run_zero_order: smoothing radius must be > 0");
  if (cfg.N < 1) throw ConfigError("run_zero_order: iteration count must be >= 1");
  if (cfg.eta < 0.0) throw ConfigError("run_zero_order: stepsize must be >= 0");

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  ZoRun run;
  run.K_init = K0;
  run.config = cfg;

  const Eigen::Index rows = K0.rows(), cols = K0.cols();
  const double sqrt_dim = std::sqrt(static_cast<double>(K0.size()));
  Rng direction_rng(derive_seed(cfg.rollout.seed, 0));

  Eigen::MatrixXd K = K0;
  auto record = [&](long iter, double J_hat, double grad_fro, bool saturated) {
    auto [J, gap] = exact_eval(K);
    run.trace.push_back({iter, J, gap, grad_fro, J_hat, saturated});
  };
  record(0, kNaN, kNaN, false);

  for (long i = 0; i < cfg.N; ++i) {
    const Eigen::MatrixXd U = sphere_matrix(rows, cols, direction_rng);
    const std::uint64_t seed1 = derive_seed(cfg.rollout.seed, 2 * i + 1);
    const std::uint64_t seed2 =
        cfg.common_random_numbers ? seed1 : derive_seed(cfg.rollout.seed, 2 * i + 2);

    const auto [J1, sat1] =
        rollout_cost(Eigen::MatrixXd(K + (cfg.r * sqrt_dim) * U), seed1);
    const auto [J2, sat2] =
        rollout_cost(Eigen::MatrixXd(K - (cfg.r * sqrt_dim) * U), seed2);
    run.n_saturated += static_cast<long>(sat1) + static_cast<long>(sat2);

    Eigen::MatrixXd estimate = (sqrt_dim / (2.0 * cfg.r)) * (J1 - J2) * U;
    if (cfg.grad_clip > 0.0) {
      const double norm = estimate.norm();
      if (norm > cfg.grad_clip) estimate *= cfg.grad_clip / norm;
    }
    K -= cfg.eta * estimate;

    if ((i + 1) % cfg.record_every == 0 || i + 1 == cfg.N) {
      record(i + 1, 0.5 * (J1 + J2), estimate.norm(), sat1 || sat2);
    }
  }
  run.K_final = std::move(K);
  run.divergence_warning =
      run.n_saturated > cfg.saturation_warn_fraction * 2.0 * static_cast<double>(cfg.N);
  return run;
}

}  // namespace iofpg::detail
