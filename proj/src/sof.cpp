#include "iofpg/sof.hpp"

#include <cmath>
#include <sstream>

#include "iofpg/detail/descent.hpp"
#include "iofpg/detail/zo_loop.hpp"

namespace iofpg {

using Eigen::MatrixXd;

namespace {

MatrixXd sof_closed_loop(const IofProblem& prob, const MatrixXd& Ks) {
  if (Ks.rows() != prob.m() || Ks.cols() != prob.d()) {
    throw DimensionError("sof: gain must be m x d");
  }
  return prob.sys.A - prob.sys.B * Ks * prob.sys.C;
}

}  // namespace

StabilityReport sof_is_stabilizing(const IofProblem& prob, const MatrixXd& Ks) {
  StabilityReport rep;
  rep.rho = spectral_radius(sof_closed_loop(prob, Ks));
  rep.margin = 1.0 - rep.rho;
  rep.stabilizing = rep.rho < 1.0;
  return rep;
}

SofCertificate sof_cost_and_gradient(const IofProblem& prob, const MatrixXd& Sigma0,
                                     const MatrixXd& Ks) {
  const MatrixXd As = sof_closed_loop(prob, Ks);
  const double rho = spectral_radius(As);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "sof_cost_and_gradient: rho(A - B Ks C) = " << rho << " >= 1";
    throw InstabilityError(os.str(), rho);
  }
  const MatrixXd KsC = Ks * prob.sys.C;
  const MatrixXd W = prob.Qc + KsC.transpose() * prob.R * KsC;

  SofCertificate cert;
  cert.Ks = Ks;
  cert.P_s = solve_discrete_lyapunov(As, 0.5 * (W + W.transpose()),
                                     LyapunovForm::kObservability);
  cert.Sigma_s = solve_discrete_lyapunov(As, Sigma0, LyapunovForm::kControllability);
  cert.J = (cert.P_s * Sigma0).trace();
  cert.grad = 2.0 *
              ((prob.R + prob.sys.B.transpose() * cert.P_s * prob.sys.B) * KsC -
               prob.sys.B.transpose() * cert.P_s * prob.sys.A) *
              cert.Sigma_s * prob.sys.C.transpose();
  return cert;
}

PgRun run_sof_pg(const IofProblem& prob, const MatrixXd& Sigma0, const MatrixXd& Ks0,
                 const PgConfig& cfg, double Jstar_ref) {
  const StabilityReport rep = sof_is_stabilizing(prob, Ks0);
  if (!rep.stabilizing) {
    std::ostringstream os;
    os << "run_sof_pg: initial gain is not feasible, rho = " << rep.rho;
    throw InstabilityError(os.str(), rep.rho);
  }
  auto eval = [&](const MatrixXd& Ks) {
    const SofCertificate cert = sof_cost_and_gradient(prob, Sigma0, Ks);
    return std::make_pair(cert.J, cert.grad);
  };
  detail::DescentOutcome out = detail::descent_loop(eval, Ks0, cfg, Jstar_ref);

  PgRun run;
  run.K_init = Ks0;
  run.config = cfg;
  run.K_final = std::move(out.K);
  run.trace = std::move(out.trace);
  run.converged = out.converged;
  run.stalled = out.stalled;
  run.iters = out.iters;
  run.limit_error = std::numeric_limits<double>::quiet_NaN();
  return run;
}

ZoRun run_zero_order_sof(const IofProblem& prob, const MatrixXd& Ks0, const ZoConfig& cfg,
                         const SolutionGeometry* geom) {
  if (Ks0.rows() != prob.m() || Ks0.cols() != prob.d()) {
    throw DimensionError("run_zero_order_sof: gain must be m x d");
  }
  auto rollout_cost = [&](const MatrixXd& Ks, std::uint64_t seed) {
    const Rollout ro =
        simulate_rollout_sof(prob, Ks, cfg.rollout.T, seed, cfg.saturation_cap);
    return std::make_pair(ro.cost, ro.saturated);
  };
  auto exact_eval = [&](const MatrixXd& Ks) -> std::pair<double, double> {
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    if (geom == nullptr) return {kNaN, kNaN};
    try {
      const SofCertificate cert = sof_cost_and_gradient(prob, geom->Sigma0, Ks);
      return {cert.J, (cert.J - geom->Jstar) / std::abs(geom->Jstar)};
    } catch (const InstabilityError&) {
      return {kNaN, std::numeric_limits<double>::infinity()};
    }
  };
  return detail::zo_loop(Ks0, cfg, rollout_cost, exact_eval);
}

}  // namespace iofpg
