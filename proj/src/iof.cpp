#include "iofpg/iof.hpp"

#include <cassert>
#include <sstream>

namespace iofpg {

using Eigen::MatrixXd;

MatrixXd IofProblem::closed_loop(const MatrixXd& K) const {
  if (K.rows() != m() || K.cols() != q()) {
    std::ostringstream os;
    os << "closed_loop: gain must be " << m() << "x" << q() << ", got " << K.rows()
       << "x" << K.cols();
    throw DimensionError(os.str());
  }
  return sys.A - sys.B * K * rec.Sdag;
}

IofProblem make_problem(LtiSystem sys, MatrixXd Q, MatrixXd R, bool fallback_full_order) {
  if (Q.rows() != sys.d() || Q.cols() != sys.d()) {
    throw DimensionError("make_problem: Q must be d x d");
  }
  if (R.rows() != sys.m() || R.cols() != sys.m()) {
    throw DimensionError("make_problem: R must be m x m");
  }
  if (!is_symmetric(Q) || min_eigenvalue_sym(Q) < -1e-10 * (1.0 + spectral_norm(Q))) {
    throw DomainError("make_problem: Q must be symmetric PSD");
  }
  if (!is_symmetric(R) || min_eigenvalue_sym(R) <= 1e-10 * (1.0 + spectral_norm(R))) {
    throw DomainError("make_problem: R must be symmetric PD");
  }
  const StructuralIndices idx = structural_indices(sys, fallback_full_order);
  RecoveryOperators rec = build_recovery(sys, idx);
  MatrixXd Qc = sys.C.transpose() * Q * sys.C;
  return IofProblem{std::move(sys), std::move(Q), std::move(R), std::move(Qc),
                    std::move(rec)};
}

StabilityReport is_stabilizing(const IofProblem& prob, const MatrixXd& K) {
  StabilityReport rep;
  rep.rho = spectral_radius(prob.closed_loop(K));
  rep.margin = 1.0 - rep.rho;
  rep.stabilizing = rep.rho < 1.0;
  return rep;
}

CostCertificate exact_cost(const IofProblem& prob, const MatrixXd& Sigma0,
                           const MatrixXd& K) {
  if (Sigma0.rows() != prob.n() || Sigma0.cols() != prob.n()) {
    throw DimensionError("exact_cost: Sigma0 must be n x n");
  }
  if (!is_symmetric(Sigma0) ||
      min_eigenvalue_sym(Sigma0) <= 1e-12 * (1.0 + spectral_norm(Sigma0))) {
    throw DomainError("exact_cost: Sigma0 must be symmetric PD");
  }
  const MatrixXd Acl = prob.closed_loop(K);
  const double rho = spectral_radius(Acl);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "exact_cost: rho(A - B K Sdag) = " << rho << " >= 1";
    throw InstabilityError(os.str(), rho);
  }

  const MatrixXd& Sdag = prob.rec.Sdag;
  const MatrixXd KSdag = K * Sdag;
  const MatrixXd W = prob.Qc + KSdag.transpose() * prob.R * KSdag;

  CostCertificate cert;
  cert.K = K;
  cert.P_K = solve_discrete_lyapunov(Acl, 0.5 * (W + W.transpose()),
                                     LyapunovForm::kObservability);
  cert.Sigma_K = solve_discrete_lyapunov(Acl, Sigma0, LyapunovForm::kControllability);
  cert.J = (cert.P_K * Sigma0).trace();
  cert.E_K = (prob.R + prob.sys.B.transpose() * cert.P_K * prob.sys.B) * KSdag -
             prob.sys.B.transpose() * cert.P_K * prob.sys.A;
  cert.grad = 2.0 * cert.E_K * cert.Sigma_K * Sdag.transpose();
  // The gradient lies in F-perp; drift here means the recovery operators
  // and the Lyapunov solves disagree.
  assert(orthogonality_residual(prob.rec, cert.grad) <=
         1e-9 * (1.0 + cert.grad.norm()));
  return cert;
}

SolutionGeometry optimal_gain(const IofProblem& prob, const MatrixXd& Sigma0) {
  SolutionGeometry geom;
  geom.Pstar = solve_dare(prob.sys.A, prob.sys.B, prob.Qc, prob.R);
  const MatrixXd BtP = prob.sys.B.transpose() * geom.Pstar;
  geom.Kstar = (prob.R + BtP * prob.sys.B).ldlt().solve(BtP * prob.sys.A * prob.rec.S);
  geom.proj_perp = prob.rec.proj_perp;
  geom.Sigma0 = Sigma0;
  geom.S_norm = spectral_norm(prob.rec.S);
  geom.R_min_eig = min_eigenvalue_sym(prob.R);

  // Optimal Lyapunov identity: P* must satisfy the closed-loop equation of
  // K* itself.
  const MatrixXd KSdag = geom.Kstar * prob.rec.Sdag;
  const MatrixXd Acl = prob.sys.A - prob.sys.B * KSdag;
  const MatrixXd residual = geom.Pstar - prob.Qc - KSdag.transpose() * prob.R * KSdag -
                            Acl.transpose() * geom.Pstar * Acl;
  if (residual.norm() > 1e-7 * (1.0 + geom.Pstar.norm())) {
    throw NumericalError("optimal_gain: optimal Lyapunov identity residual too large");
  }

  geom.Sigma_star = solve_discrete_lyapunov(Acl, Sigma0, LyapunovForm::kControllability);
  geom.Jstar = (geom.Pstar * Sigma0).trace();
  return geom;
}

PlCertificate pl_certificate(const IofProblem& prob, const SolutionGeometry& geom,
                             const CostCertificate& cert) {
  (void)prob;
  PlCertificate pl;
  pl.lhs = cert.J - geom.Jstar;
  const double sigma_min_SigmaK = min_eigenvalue_sym(cert.Sigma_K);
  const double coeff = spectral_norm(geom.Sigma_star) * geom.S_norm * geom.S_norm /
                       (4.0 * geom.R_min_eig * sigma_min_SigmaK * sigma_min_SigmaK);
  pl.rhs = coeff * cert.grad.squaredNorm();
  return pl;
}

double orthogonality_residual(const RecoveryOperators& rec, const MatrixXd& grad) {
  return (grad - grad * rec.proj_perp).norm();
}

}  // namespace iofpg
