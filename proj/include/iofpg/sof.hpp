#pragma once

#include <Eigen/Dense>
#include <limits>

#include "iofpg/pg.hpp"
#include "iofpg/zero_order.hpp"

namespace iofpg {

/// Static output feedback u_t = -Ks y_t, the comparison baseline.

struct SofCertificate {
  Eigen::MatrixXd Ks;       // m x d
  Eigen::MatrixXd P_s;      // n x n
  Eigen::MatrixXd Sigma_s;  // n x n
  Eigen::MatrixXd grad;     // m x d
  double J = 0.0;
};

StabilityReport sof_is_stabilizing(const IofProblem& prob, const Eigen::MatrixXd& Ks);

/// With As = A - B Ks C:
///   P_s = Qc + C'Ks'R Ks C + As'P_s As,   Sigma_s = Sigma0 + As Sigma_s As',
///   J = tr(P_s Sigma0),  grad = 2((R + B'P_s B)Ks C - B'P_s A) Sigma_s C'.
SofCertificate sof_cost_and_gradient(const IofProblem& prob,
                                     const Eigen::MatrixXd& Sigma0,
                                     const Eigen::MatrixXd& Ks);

/// Gradient descent over Ks with the same stepping machinery as run_pg.
/// SOF has no global-optimality certificate; the gap column is measured
/// against Jstar_ref when finite (e.g. the LQR optimum) and the run stops
/// on cfg.grad_tol or the iteration budget.
PgRun run_sof_pg(const IofProblem& prob, const Eigen::MatrixXd& Sigma0,
                 const Eigen::MatrixXd& Ks0, const PgConfig& cfg,
                 double Jstar_ref = std::numeric_limits<double>::quiet_NaN());

}  // namespace iofpg
