#pragma once

#include <Eigen/Dense>

#include "iofpg/lti_system.hpp"

namespace iofpg {

/// Plant, quadratic weights and the recovery machinery bundled together;
/// every analytic operation below works on one of these.
struct IofProblem {
  LtiSystem sys;
  Eigen::MatrixXd Q;   // d x d, PSD output weight
  Eigen::MatrixXd R;   // m x m, PD input weight
  Eigen::MatrixXd Qc;  // C' Q C
  RecoveryOperators rec;

  Eigen::Index n() const { return sys.n(); }
  Eigen::Index m() const { return sys.m(); }
  Eigen::Index d() const { return sys.d(); }
  Eigen::Index q() const { return rec.idx.q; }

  /// A - B K Sdag for an m x q gain.
  Eigen::MatrixXd closed_loop(const Eigen::MatrixXd& K) const;
};

/// Validates weights, computes indices and recovery operators.
IofProblem make_problem(LtiSystem sys, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                        bool fallback_full_order = false);

struct StabilityReport {
  bool stabilizing = false;
  double rho = 0.0;
  double margin = 0.0;  // 1 - rho
};

/// Feasibility test rho(A - B K Sdag) < 1 with its margin.
StabilityReport is_stabilizing(const IofProblem& prob, const Eigen::MatrixXd& K);

/// Cost, value matrix, closed-loop covariance and gradient for one
/// stabilizing gain, bound together.
struct CostCertificate {
  Eigen::MatrixXd K;        // m x q
  Eigen::MatrixXd P_K;      // n x n
  Eigen::MatrixXd Sigma_K;  // n x n
  Eigen::MatrixXd E_K;      // m x n
  Eigen::MatrixXd grad;     // m x q
  double J = 0.0;
};

/// Model-based cost and gradient:
///   P_K  = Qc + Sdag' K' R K Sdag + Acl' P_K Acl
///   Sigma_K = Sigma0 + Acl Sigma_K Acl'
///   J = tr(P_K Sigma0), E_K = (R + B'P_K B) K Sdag - B'P_K A,
///   grad = 2 E_K Sigma_K Sdag'.
/// Throws InstabilityError for unstable K, DomainError for non-PD Sigma0.
CostCertificate exact_cost(const IofProblem& prob, const Eigen::MatrixXd& Sigma0,
                           const Eigen::MatrixXd& K);

/// The optimal gain, its Riccati matrix and the geometry of the solution
/// set {K* + Delta : Delta Sdag = 0} for a fixed initial-state covariance.
struct SolutionGeometry {
  Eigen::MatrixXd Kstar;       // m x q
  Eigen::MatrixXd Pstar;       // n x n
  Eigen::MatrixXd Sigma0;      // n x n
  Eigen::MatrixXd Sigma_star;  // n x n, covariance under K*
  Eigen::MatrixXd proj_perp;   // q x q, right-applied projector onto F-perp
  double Jstar = 0.0;          // tr(Pstar Sigma0)
  double S_norm = 0.0;         // spectral norm of S
  double R_min_eig = 0.0;      // smallest eigenvalue of R

  Eigen::MatrixXd project_F(const Eigen::MatrixXd& K) const {
    return K - K * proj_perp;
  }
  Eigen::MatrixXd project_Fperp(const Eigen::MatrixXd& K) const {
    return K * proj_perp;
  }
};

/// K* = (R + B'P*B)^{-1} B'P*A S with P* from the DARE; also verifies the
/// optimal Lyapunov identity residual.
SolutionGeometry optimal_gain(const IofProblem& prob, const Eigen::MatrixXd& Sigma0);

/// Gradient-dominance certificate: lhs = J(K) - J*, and rhs is the
/// Polyak-Lojasiewicz bound
///   ||Sigma*|| ||S||^2 / (4 sigma_min(R) sigma_min(Sigma_K)^2) * tr(grad' grad).
struct PlCertificate {
  double lhs = 0.0;
  double rhs = 0.0;
};

PlCertificate pl_certificate(const IofProblem& prob, const SolutionGeometry& geom,
                             const CostCertificate& cert);

/// || grad - grad * proj_perp ||_F; zero for every gradient (orthogonality
/// to the solution-set direction space).
double orthogonality_residual(const RecoveryOperators& rec, const Eigen::MatrixXd& grad);

}  // namespace iofpg
