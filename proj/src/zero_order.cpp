#include "iofpg/zero_order.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "iofpg/detail/zo_loop.hpp"
#include "iofpg/rng.hpp"

namespace iofpg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Common trajectory engine; policy(ro, col) must return u_t given that all
// columns < col are filled and states/outputs at col are filled.
template <typename Policy>
Rollout roll(const IofProblem& prob, int T, std::uint64_t seed, double cap,
             Policy&& policy) {
  const Index n = prob.n(), m = prob.m(), d = prob.d();
  const int p = prob.rec.idx.p;
  if (T < 0) throw DomainError("simulate_rollout: horizon T must be >= 0");

  Rollout ro;
  const Index len = p + T + 1;
  ro.inputs = MatrixXd::Zero(m, len);
  ro.outputs = MatrixXd::Zero(d, len);
  ro.states = MatrixXd::Zero(n, len);

  Rng rng(seed);
  VectorXd x = gaussian_vector(n, rng);  // x_{-p}

  // Warm-up: random inputs for t in {-p..-1}.
  for (int col = 0; col < p; ++col) {
    ro.states.col(col) = x;
    ro.outputs.col(col) = prob.sys.C * x;
    const VectorXd u = gaussian_vector(m, rng);
    ro.inputs.col(col) = u;
    x = prob.sys.A * x + prob.sys.B * u;
  }

  for (int t = 0; t <= T; ++t) {
    const Index col = p + t;
    ro.states.col(col) = x;
    ro.outputs.col(col) = prob.sys.C * x;
    const VectorXd u = policy(ro, col);
    ro.inputs.col(col) = u;
    const VectorXd y = ro.outputs.col(col);
    ro.cost += y.dot(prob.Q * y) + u.dot(prob.R * u);
    if (!std::isfinite(ro.cost) || ro.cost > cap) {
      ro.cost = cap;
      ro.saturated = true;
      break;
    }
    x = prob.sys.A * x + prob.sys.B * u;
  }
  return ro;
}

}  // namespace

Rollout simulate_rollout(const IofProblem& prob, const MatrixXd& K, int T,
                         std::uint64_t seed, double saturation_cap) {
  if (K.rows() != prob.m() || K.cols() != prob.q()) {
    throw DimensionError("simulate_rollout: gain must be m x q");
  }
  const int p = prob.rec.idx.p;
  const Index m = prob.m(), d = prob.d();
  return roll(prob, T, seed, saturation_cap, [&](const Rollout& ro, Index col) {
    // z_{t,p}: u-block then y-block, newest first.
    MatrixXd hist_u(m, p), hist_y(d, p);
    for (int j = 1; j <= p; ++j) {
      hist_u.col(j - 1) = ro.inputs.col(col - j);
      hist_y.col(j - 1) = ro.outputs.col(col - j);
    }
    const VectorXd z = assemble_feedback_vector(hist_u, hist_y);
    return VectorXd(-K * z);
  });
}

Rollout simulate_rollout_sof(const IofProblem& prob, const MatrixXd& Ks, int T,
                             std::uint64_t seed, double saturation_cap) {
  if (Ks.rows() != prob.m() || Ks.cols() != prob.d()) {
    throw DimensionError("simulate_rollout_sof: gain must be m x d");
  }
  return roll(prob, T, seed, saturation_cap, [&](const Rollout& ro, Index col) {
    return VectorXd(-Ks * ro.outputs.col(col));
  });
}

MatrixXd warmup_covariance(const IofProblem& prob) {
  MatrixXd Ap = MatrixXd::Identity(prob.n(), prob.n());
  for (int i = 0; i < prob.rec.idx.p; ++i) Ap = prob.sys.A * Ap;
  return prob.rec.Cp * prob.rec.Cp.transpose() + Ap * Ap.transpose();
}

MatrixXd two_point_estimate(const std::function<double(const MatrixXd&)>& cost,
                            const MatrixXd& K, double r, const MatrixXd& U) {
  if (r <= 0.0) throw DomainError("two_point_estimate: smoothing radius must be > 0");
  if (U.rows() != K.rows() || U.cols() != K.cols()) {
    throw DimensionError("two_point_estimate: U must match the gain shape");
  }
  if (std::abs(U.norm() - 1.0) > 1e-8) {
    throw DomainError("two_point_estimate: U must have unit Frobenius norm");
  }
  const double sqrt_dim = std::sqrt(static_cast<double>(K.size()));
  const double J1 = cost(K + (r * sqrt_dim) * U);
  const double J2 = cost(K - (r * sqrt_dim) * U);
  return (sqrt_dim / (2.0 * r)) * (J1 - J2) * U;
}

ZoRun run_zero_order(const IofProblem& prob, const MatrixXd& K0, const ZoConfig& cfg,
                     const SolutionGeometry* geom) {
  if (K0.rows() != prob.m() || K0.cols() != prob.q()) {
    throw DimensionError("run_zero_order: gain must be m x q");
  }
  auto rollout_cost = [&](const MatrixXd& K, std::uint64_t seed) {
    const Rollout ro = simulate_rollout(prob, K, cfg.rollout.T, seed, cfg.saturation_cap);
    return std::make_pair(ro.cost, ro.saturated);
  };
  auto exact_eval = [&](const MatrixXd& K) -> std::pair<double, double> {
    if (geom == nullptr) return {kNaN, kNaN};
    try {
      const CostCertificate cert = exact_cost(prob, geom->Sigma0, K);
      return {cert.J, (cert.J - geom->Jstar) / std::abs(geom->Jstar)};
    } catch (const InstabilityError&) {
      return {kNaN, std::numeric_limits<double>::infinity()};
    }
  };
  return detail::zo_loop(K0, cfg, rollout_cost, exact_eval);
}

}  // namespace iofpg
