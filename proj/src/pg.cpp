#include "iofpg/pg.hpp"

#include <cmath>
#include <sstream>

#include "iofpg/detail/descent.hpp"

namespace iofpg {

using Eigen::MatrixXd;

MatrixXd pg_step(const IofProblem& prob, const MatrixXd& Sigma0, const MatrixXd& K,
                 double eta) {
  const CostCertificate cert = exact_cost(prob, Sigma0, K);
  MatrixXd next = K - eta * cert.grad;
  const StabilityReport rep = is_stabilizing(prob, next);
  if (!rep.stabilizing) {
    std::ostringstream os;
    os << "pg_step: updated gain is unstable, rho = " << rep.rho;
    throw StepRejectedError(os.str(), rep.rho);
  }
  return next;
}

PgRun run_pg(const IofProblem& prob, const SolutionGeometry& geom, const MatrixXd& Sigma0,
             const MatrixXd& K0, const PgConfig& cfg) {
  if (cfg.eta <= 0.0) throw ConfigError("run_pg: eta must be positive");
  if (cfg.gap_tol <= 0.0) throw ConfigError("run_pg: gap_tol must be positive");

  const StabilityReport rep = is_stabilizing(prob, K0);
  if (!rep.stabilizing) {
    std::ostringstream os;
    os << "run_pg: initial gain is not stabilizing, rho = " << rep.rho;
    throw InstabilityError(os.str(), rep.rho);
  }

  PgRun run;
  run.K_init = K0;
  run.config = cfg;
  run.predicted_limit = geom.project_F(K0) + geom.project_Fperp(geom.Kstar);

  if ((K0 - geom.Kstar).norm() == 0.0) {
    // Degenerate start at the optimum itself: nothing to descend.
    const CostCertificate cert = exact_cost(prob, Sigma0, K0);
    run.K_final = K0;
    run.trace = {{0, cert.J, (cert.J - geom.Jstar) / std::abs(geom.Jstar),
                  cert.grad.norm()}};
    run.converged = true;
    run.iters = 0;
    run.limit_error = (run.K_final - run.predicted_limit).norm();
    return run;
  }

  auto eval = [&](const MatrixXd& K) {
    const CostCertificate cert = exact_cost(prob, Sigma0, K);
    return std::make_pair(cert.J, cert.grad);
  };
  detail::DescentOutcome out = detail::descent_loop(eval, K0, cfg, geom.Jstar);

  run.K_final = std::move(out.K);
  run.trace = std::move(out.trace);
  run.converged = out.converged;
  run.stalled = out.stalled;
  run.iters = out.iters;
  run.limit_error = (run.K_final - run.predicted_limit).norm();
  return run;
}

RateReport rate_certificate(const PgRun& run, const SolutionGeometry& geom,
                            double sigma0_min, double gap_floor) {
  if (run.trace.size() < 2) {
    throw DomainError("rate_certificate: need at least two trace records");
  }
  RateReport report;
  report.bound = 1.0 - 2.0 * run.config.eta * sigma0_min * sigma0_min * geom.R_min_eig /
                           (spectral_norm(geom.Sigma_star) * geom.S_norm * geom.S_norm);
  for (std::size_t i = 0; i + 1 < run.trace.size(); ++i) {
    const double gap_i = run.trace[i].J - geom.Jstar;
    const double gap_next = run.trace[i + 1].J - geom.Jstar;
    if (run.trace[i].gap <= gap_floor || run.trace[i + 1].gap <= gap_floor) continue;
    report.observed.push_back(gap_next / gap_i);
  }
  report.all_within_bound = true;
  for (double f : report.observed) {
    if (f > report.bound + 1e-9) {
      report.all_within_bound = false;
      break;
    }
  }
  return report;
}

}  // namespace iofpg
