#include "iofpg/matrix_ops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace iofpg {

namespace {

void require_square(const MatrixXd& M, const char* name) {
  if (M.rows() != M.cols()) {
    std::ostringstream os;
    os << name << " must be square, got " << M.rows() << "x" << M.cols();
    throw DimensionError(os.str());
  }
}

constexpr Eigen::Index kDirectSolveMaxUnknowns = 400;
constexpr double kLyapunovIterTol = 1e-12;
constexpr long kLyapunovIterCap = 2'000'000;
constexpr double kDareRelTol = 1e-12;
constexpr long kDareIterCap = 100'000;

}  // namespace

double spectral_radius(const MatrixXd& M) {
  require_square(M, "spectral_radius: input");
  if (M.rows() == 0) return 0.0;
  if (M.rows() == 1) return std::abs(M(0, 0));
  Eigen::EigenSolver<MatrixXd> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_radius: eigenvalue iteration did not converge",
                         es.getMaxIterations());
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return M.jacobiSvd().singularValues()(0);
}

double min_eigenvalue_sym(const MatrixXd& M) {
  require_square(M, "min_eigenvalue_sym: input");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_symmetric(const MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) return false;
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + M.cwiseAbs().maxCoeff());
}

bool all_finite(const MatrixXd& M) { return M.allFinite(); }

MatrixXd solve_discrete_lyapunov(const MatrixXd& Acl, const MatrixXd& W,
                                 LyapunovForm form) {
  require_square(Acl, "solve_discrete_lyapunov: Acl");
  require_square(W, "solve_discrete_lyapunov: W");
  if (Acl.rows() != W.rows()) {
    throw DimensionError("solve_discrete_lyapunov: Acl and W sizes differ");
  }
  if (!is_symmetric(W)) {
    throw DomainError("solve_discrete_lyapunov: W is not symmetric");
  }
  const double rho = spectral_radius(Acl);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "solve_discrete_lyapunov: rho(Acl) = " << rho << " >= 1";
    throw InstabilityError(os.str(), rho);
  }

  // X = W + M X M'  with M = Acl' for the observability form, M = Acl for
  // the controllability form; both reduce to the same vectorized system.
  const MatrixXd M =
      (form == LyapunovForm::kObservability) ? MatrixXd(Acl.transpose()) : Acl;
  const Eigen::Index n = Acl.rows();

  if (n * n <= kDirectSolveMaxUnknowns) {
    // vec(M X M') = (M (x) M) vec(X); solve (I - M (x) M) vec(X) = vec(W).
    MatrixXd lhs = MatrixXd::Identity(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        lhs.block(i * n, j * n, n, n) -= M(i, j) * M;
      }
    }
    VectorXd w = Eigen::Map<const VectorXd>(W.data(), n * n);
    VectorXd x = lhs.colPivHouseholderQr().solve(w);
    MatrixXd X = Eigen::Map<MatrixXd>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
  }

  // Fixed-point iteration X <- W + M X M'.
  MatrixXd X = W;
  for (long it = 0; it < kLyapunovIterCap; ++it) {
    MatrixXd next = W + M * X * M.transpose();
    const double diff = (next - X).norm();
    X = std::move(next);
    if (diff <= kLyapunovIterTol * (1.0 + X.norm())) {
      return 0.5 * (X + X.transpose());
    }
  }
  throw NumericalError("solve_discrete_lyapunov: fixed-point iteration cap reached",
                       kLyapunovIterCap);
}

MatrixXd solve_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Qc,
                    const MatrixXd& R) {
  require_square(A, "solve_dare: A");
  require_square(Qc, "solve_dare: Qc");
  require_square(R, "solve_dare: R");
  if (B.rows() != A.rows() || Qc.rows() != A.rows() || R.rows() != B.cols()) {
    throw DimensionError("solve_dare: inconsistent operand shapes");
  }
  if (!is_symmetric(Qc) || min_eigenvalue_sym(Qc) < -1e-10 * (1.0 + spectral_norm(Qc))) {
    throw DomainError("solve_dare: Qc is not symmetric PSD");
  }
  if (!is_symmetric(R) || min_eigenvalue_sym(R) <= 1e-10 * (1.0 + spectral_norm(R))) {
    throw DomainError("solve_dare: R is not symmetric PD");
  }

  auto riccati_map = [&](const MatrixXd& P) {
    const MatrixXd BtP = B.transpose() * P;
    const MatrixXd G = (R + BtP * B).ldlt().solve(BtP * A);
    MatrixXd next = Qc + A.transpose() * P * A - A.transpose() * BtP.transpose() * G;
    return MatrixXd(0.5 * (next + next.transpose()));
  };

  MatrixXd P = Qc;
  bool converged = false;
  long it = 0;
  for (; it < kDareIterCap; ++it) {
    MatrixXd next = riccati_map(P);
    const double diff = (next - P).norm();
    P = std::move(next);
    if (diff <= kDareRelTol * (1.0 + P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("solve_dare: Riccati iteration cap reached", kDareIterCap);
  }
  // Polish: keep iterating while the successive difference still shrinks.
  double last_diff = std::numeric_limits<double>::max();
  for (int k = 0; k < 50; ++k) {
    MatrixXd next = riccati_map(P);
    const double diff = (next - P).norm();
    if (diff >= last_diff) break;
    last_diff = diff;
    P = std::move(next);
  }

  const MatrixXd gain = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  const double rho_cl = spectral_radius(A - B * gain);
  if (rho_cl >= 1.0) {
    throw NumericalError("solve_dare: converged P does not stabilize the closed loop");
  }
  const MatrixXd residual =
      P - A.transpose() * P * A - Qc + A.transpose() * P * B * gain;
  if (residual.norm() > 1e-8 * (1.0 + P.norm())) {
    throw NumericalError("solve_dare: ARE residual above tolerance", it);
  }
  return P;
}

namespace {

// Shared rank gate: throws RankError if the smallest singular value of M is
// not clearly positive relative to the largest.
Eigen::JacobiSVD<MatrixXd> checked_svd(const MatrixXd& M, double rank_tol,
                                       Eigen::Index required_rank, const char* who) {
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  const double smallest = sv(required_rank - 1);
  if (smallest <= rank_tol * sv(0)) {
    std::ostringstream os;
    os << who << ": rank-deficient input, singular value " << smallest
       << " vs largest " << sv(0);
    throw RankError(os.str(), smallest);
  }
  return svd;
}

}  // namespace

MatrixXd right_pinv(const MatrixXd& S, double rank_tol) {
  if (S.rows() > S.cols()) {
    throw DimensionError("right_pinv: expected a wide (or square) matrix");
  }
  checked_svd(S, rank_tol, S.rows(), "right_pinv");
  return S.transpose() * (S * S.transpose()).ldlt().solve(MatrixXd::Identity(S.rows(), S.rows()));
}

MatrixXd left_pinv(const MatrixXd& O, double rank_tol) {
  if (O.cols() > O.rows()) {
    throw DimensionError("left_pinv: expected a tall (or square) matrix");
  }
  checked_svd(O, rank_tol, O.cols(), "left_pinv");
  return (O.transpose() * O).ldlt().solve(MatrixXd(O.transpose()));
}

Eigen::Index numerical_rank(const MatrixXd& M, double rank_tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_tol * sv(0)) ++r;
  }
  return r;
}

}  // namespace iofpg
