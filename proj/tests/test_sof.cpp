#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iofpg/fixtures.hpp"
#include "iofpg/rng.hpp"
#include "iofpg/sof.hpp"
#include "oracles.hpp"

using namespace iofpg;
using Eigen::MatrixXd;

namespace {

MatrixXd random_feasible_sof_gain(const IofProblem& prob, Rng& rng, double scale = 0.3) {
  while (true) {
    const MatrixXd Ks = scale * gaussian_matrix(prob.m(), prob.d(), rng);
    if (sof_is_stabilizing(prob, Ks).stabilizing) return Ks;
  }
}

}  // namespace

TEST_CASE("zero SOF gain on a stable plant reproduces the open-loop Lyapunov cost") {
  const IofProblem prob = benchmark_problem_d2();
  const MatrixXd Sigma0 = MatrixXd::Identity(4, 4);
  const SofCertificate cert =
      sof_cost_and_gradient(prob, Sigma0, MatrixXd::Zero(2, 2));
  const MatrixXd P0 = oracles::series_lyapunov(prob.sys.A.transpose(), prob.Qc, 2000);
  CHECK(std::abs(cert.J - (P0 * Sigma0).trace()) <= 1e-6 * std::abs(cert.J));
}

TEST_CASE("SOF gradient matches central finite differences") {
  const IofProblem prob = benchmark_problem_d2();
  const MatrixXd Sigma0 = MatrixXd::Identity(4, 4);
  Rng rng(3);
  auto cost = [&](const MatrixXd& Ks) { return sof_cost_and_gradient(prob, Sigma0, Ks).J; };
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixXd Ks = random_feasible_sof_gain(prob, rng);
    const SofCertificate cert = sof_cost_and_gradient(prob, Sigma0, Ks);
    const MatrixXd fd = oracles::finite_difference_gradient(cost, Ks, 1e-6);
    CHECK((cert.grad - fd).norm() <= 1e-4 * fd.norm());
  }
}

TEST_CASE("infeasible SOF gains are rejected") {
  const IofProblem prob = benchmark_problem_d2();
  Rng rng(5);
  MatrixXd Ks = gaussian_matrix(2, 2, rng);
  while (sof_is_stabilizing(prob, Ks).rho < 1.0) Ks *= 1.5;
  CHECK_THROWS_AS(sof_cost_and_gradient(prob, MatrixXd::Identity(4, 4), Ks),
                  InstabilityError);
  CHECK_THROWS_AS(run_sof_pg(prob, MatrixXd::Identity(4, 4), Ks, PgConfig{}),
                  InstabilityError);
}

TEST_CASE("with C = I the converged SOF policy attains the LQR optimum") {
  // d = n and invertible C: static output feedback sees the full state.
  const LtiSystem plant = random_system(4, 2, 4, 71, 0.8);
  LtiSystem sys(plant.A, plant.B, MatrixXd::Identity(4, 4));
  const IofProblem prob =
      make_problem(sys, MatrixXd::Identity(4, 4), 0.01 * MatrixXd::Identity(2, 2));
  const MatrixXd Sigma0 = MatrixXd::Identity(4, 4);
  const MatrixXd Pstar = solve_dare(sys.A, sys.B, prob.Qc, prob.R);
  const double J_lqr = (Pstar * Sigma0).trace();

  PgConfig cfg;
  cfg.eta = 1e-2;
  cfg.line_search = true;
  cfg.max_iters = 500000;
  cfg.gap_tol = 1e-10;
  const PgRun run = run_sof_pg(prob, Sigma0, MatrixXd::Zero(2, 4), cfg, J_lqr);
  CHECK(run.converged);
  CHECK(std::abs(run.trace.back().J - J_lqr) <= 1e-6 * J_lqr);
}

TEST_CASE("SOF descent under line search is monotone") {
  const IofProblem prob = benchmark_problem_d2();
  const MatrixXd Sigma0 = MatrixXd::Identity(4, 4);
  PgConfig cfg;
  cfg.eta = 1e-3;
  cfg.line_search = true;
  cfg.max_iters = 3000;
  cfg.grad_tol = 1e-9;
  const PgRun run = run_sof_pg(prob, Sigma0, MatrixXd::Zero(2, 2), cfg);
  for (std::size_t i = 1; i < run.trace.size(); ++i) {
    CHECK(run.trace[i].J <= run.trace[i - 1].J);
  }
}

TEST_CASE("zero stepsize leaves the SOF gain unchanged") {
  const IofProblem prob = benchmark_problem_d2();
  const MatrixXd Sigma0 = MatrixXd::Identity(4, 4);
  PgConfig cfg;
  cfg.eta = 0.0;
  cfg.line_search = false;
  cfg.max_iters = 10;
  const PgRun run = run_sof_pg(prob, Sigma0, MatrixXd::Zero(2, 2), cfg);
  CHECK(run.K_final.norm() == 0.0);
}

TEST_CASE("SOF rollouts and the sample-based loop handle the m x d search space") {
  const IofProblem prob = benchmark_problem_d2();
  const Rollout ro = simulate_rollout_sof(prob, MatrixXd::Zero(2, 2), 10, 7);
  CHECK(ro.cost > 0.0);
  CHECK_FALSE(ro.saturated);

  ZoConfig cfg;
  cfg.N = 100;
  cfg.eta = 0.0;
  cfg.rollout.T = 10;
  cfg.rollout.seed = 11;
  const ZoRun run = run_zero_order_sof(prob, MatrixXd::Zero(2, 2), cfg);
  CHECK((run.K_final).norm() == 0.0);
  CHECK(run.trace.back().iter == 100);
}
