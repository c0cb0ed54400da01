#pragma once

#include <Eigen/Dense>

#include "iofpg/errors.hpp"

namespace iofpg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Largest eigenvalue modulus of a square matrix.
///
/// Throws DimensionError for non-square input, NumericalError if the
/// eigensolver fails to converge.
double spectral_radius(const MatrixXd& M);

/// Largest singular value (induced 2-norm).
double spectral_norm(const MatrixXd& M);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue_sym(const MatrixXd& M);

bool is_symmetric(const MatrixXd& M, double tol = 1e-8);
bool all_finite(const MatrixXd& M);

/// Which side the closed-loop matrix acts on in the fixed-point equation.
enum class LyapunovForm {
  kObservability,    // X = W + Acl' X Acl   (cost-to-go, P_K)
  kControllability,  // X = W + Acl X Acl'   (state covariance, Sigma_K)
};

/// Solves the discrete Lyapunov equation for Schur-stable Acl and
/// symmetric PSD W. Uses the Kronecker vectorization solve up to 400
/// unknowns and falls back to fixed-point iteration above that.
///
/// Throws InstabilityError if rho(Acl) >= 1, DomainError if W is not
/// symmetric within tolerance.
MatrixXd solve_discrete_lyapunov(const MatrixXd& Acl, const MatrixXd& W,
                                 LyapunovForm form = LyapunovForm::kObservability);

/// Unique PSD solution of the discrete algebraic Riccati equation
///   P = A'PA + Qc - A'PB (R + B'PB)^{-1} B'PA
/// by Riccati fixed-point iteration from P0 = Qc (relative tolerance
/// 1e-12, cap 1e5 iterations, then polished while still improving).
///
/// Requires Qc PSD and R PD (checked by eigenvalue sign); requires the
/// iteration to converge and the resulting closed loop to be stable.
MatrixXd solve_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Qc,
                    const MatrixXd& R);

/// S' (S S')^{-1} for full-row-rank S; S * right_pinv(S) = I.
/// Rank verified via singular values: smallest > rank_tol * largest.
MatrixXd right_pinv(const MatrixXd& S, double rank_tol = 1e-10);

/// (O' O)^{-1} O' for full-column-rank O; left_pinv(O) * O = I.
MatrixXd left_pinv(const MatrixXd& O, double rank_tol = 1e-10);

/// Numerical rank against a relative singular-value threshold.
Eigen::Index numerical_rank(const MatrixXd& M, double rank_tol = 1e-10);

}  // namespace iofpg
