#include "iofpg/lti_system.hpp"

#include <sstream>

#include "iofpg/rng.hpp"

namespace iofpg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LtiSystem::LtiSystem(MatrixXd A_, MatrixXd B_, MatrixXd C_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)) {
  if (A.rows() != A.cols()) throw DimensionError("LtiSystem: A must be square");
  if (B.rows() != A.rows()) throw DimensionError("LtiSystem: B row count must match A");
  if (C.cols() != A.rows()) throw DimensionError("LtiSystem: C column count must match A");
  if (A.rows() < 1 || B.cols() < 1 || C.rows() < 1) {
    throw DimensionError("LtiSystem: dimensions must be at least 1");
  }
  if (!all_finite(A) || !all_finite(B) || !all_finite(C)) {
    throw DomainError("LtiSystem: matrices must be finite");
  }
  const Index nn = n();
  if (numerical_rank(controllability_matrix(*this, static_cast<int>(nn))) != nn) {
    throw AssumptionError("LtiSystem: (A,B) is not controllable");
  }
  if (numerical_rank(observability_matrix(*this, static_cast<int>(nn))) != nn) {
    throw AssumptionError("LtiSystem: (C,A) is not observable");
  }
}

MatrixXd observability_matrix(const MatrixXd& A, const MatrixXd& C, int k) {
  const Index n = A.rows(), d = C.rows();
  MatrixXd O(k * d, n);
  MatrixXd CAi = C;
  for (int i = 0; i < k; ++i) {
    O.middleRows(i * d, d) = CAi;
    if (i + 1 < k) CAi = CAi * A;
  }
  return O;
}

MatrixXd observability_matrix(const LtiSystem& sys, int k) {
  return observability_matrix(sys.A, sys.C, k);
}

MatrixXd controllability_matrix(const MatrixXd& A, const MatrixXd& B, int k) {
  const Index n = A.rows(), m = B.cols();
  MatrixXd Ct(n, k * m);
  MatrixXd AiB = B;
  for (int i = 0; i < k; ++i) {
    Ct.middleCols(i * m, m) = AiB;
    if (i + 1 < k) AiB = A * AiB;
  }
  return Ct;
}

MatrixXd controllability_matrix(const LtiSystem& sys, int k) {
  return controllability_matrix(sys.A, sys.B, k);
}

StructuralIndices structural_indices(const LtiSystem& sys, bool fallback_full_order) {
  const Index n = sys.n();
  StructuralIndices idx;
  if (fallback_full_order) {
    idx.o = idx.c = idx.p = static_cast<int>(n);
    idx.q = idx.p * (sys.m() + sys.d());
    return idx;
  }
  for (int k = 1; k <= n; ++k) {
    if (numerical_rank(observability_matrix(sys, k)) == n) {
      idx.o = k;
      break;
    }
  }
  if (idx.o == 0) throw AssumptionError("structural_indices: observability rank test failed");
  for (int k = 1; k <= n; ++k) {
    if (numerical_rank(controllability_matrix(sys, k)) == n) {
      idx.c = k;
      break;
    }
  }
  if (idx.c == 0) throw AssumptionError("structural_indices: controllability rank test failed");
  idx.p = std::max(idx.o, idx.c);
  idx.q = idx.p * (sys.m() + sys.d());
  return idx;
}

RecoveryOperators build_recovery(const LtiSystem& sys, const StructuralIndices& idx) {
  const Index n = sys.n(), m = sys.m(), d = sys.d();
  const int p = idx.p;

  RecoveryOperators rec;
  rec.idx = idx;

  // Op stacks CA^{p-1} on top, descending to C at the bottom.
  rec.Op.resize(p * d, n);
  {
    MatrixXd CAi = sys.C;
    for (int i = p - 1; i >= 0; --i) {
      rec.Op.middleRows(i * d, d) = CAi;
      CAi = CAi * sys.A;
    }
  }
  rec.Cp = controllability_matrix(sys, p);

  // Strictly causal Toeplitz: block (i,j) = C A^{j-i-1} B for j > i.
  rec.Tp = MatrixXd::Zero(p * d, p * m);
  {
    MatrixXd AkB = sys.B;  // A^k B, k = 0,1,...
    for (int k = 0; k <= p - 2; ++k) {
      const MatrixXd markov = sys.C * AkB;
      for (int i = 0; i + k + 1 <= p - 1; ++i) {
        rec.Tp.block(i * d, (i + k + 1) * m, d, m) = markov;
      }
      AkB = sys.A * AkB;
    }
  }

  MatrixXd Odag;
  try {
    Odag = left_pinv(rec.Op);
  } catch (const RankError& e) {
    throw RankError(std::string("build_recovery: Op lost full column rank (") + e.what() + ")",
                    e.offending_singular_value);
  }
  MatrixXd Ap = MatrixXd::Identity(n, n);
  for (int i = 0; i < p; ++i) Ap = Ap * sys.A;

  rec.S.resize(n, idx.q);
  rec.S << rec.Cp - Ap * Odag * rec.Tp, Ap * Odag;
  rec.Sdag = right_pinv(rec.S);

  // Orthogonal projector (trace inner product) onto F-perp = {N Sdag'},
  // applied by right multiplication.
  rec.proj_perp =
      rec.Sdag * (rec.Sdag.transpose() * rec.Sdag)
                     .ldlt()
                     .solve(MatrixXd(rec.Sdag.transpose()));
  return rec;
}

LtiSystem similarity_transform(const LtiSystem& sys, const MatrixXd& T, double cond_cap) {
  if (T.rows() != sys.n() || T.cols() != sys.n()) {
    throw DimensionError("similarity_transform: T must be n x n");
  }
  Eigen::JacobiSVD<MatrixXd> svd(T);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!(cond < cond_cap)) {
    std::ostringstream os;
    os << "similarity_transform: cond(T) = " << cond << " exceeds cap " << cond_cap;
    throw ConditioningError(os.str());
  }
  const MatrixXd Tinv = T.partialPivLu().solve(MatrixXd::Identity(T.rows(), T.cols()));
  return LtiSystem(T * sys.A * Tinv, T * sys.B, sys.C * Tinv);
}

LtiSystem random_system(Index n, Index m, Index d, std::uint64_t seed,
                        std::optional<double> stability_target) {
  if (n < 1 || m < 1 || d < 1) {
    throw DimensionError("random_system: dimensions must be at least 1");
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    MatrixXd A = gaussian_matrix(n, n, rng);
    MatrixXd B = gaussian_matrix(n, m, rng);
    MatrixXd C = gaussian_matrix(d, n, rng);
    if (stability_target) {
      const double rho = spectral_radius(A);
      if (rho <= 0.0) continue;
      A *= (*stability_target / rho);
    }
    try {
      return LtiSystem(std::move(A), std::move(B), std::move(C));
    } catch (const AssumptionError&) {
      continue;
    }
  }
  throw GenerationError("random_system: no admissible system within 100 attempts");
}

VectorXd assemble_feedback_vector(const MatrixXd& hist_u, const MatrixXd& hist_y) {
  const Index m = hist_u.rows(), d = hist_y.rows();
  const Index p = hist_u.cols();
  if (hist_y.cols() != p) {
    throw DimensionError("assemble_feedback_vector: history lengths differ");
  }
  VectorXd z(p * (m + d));
  for (Index j = 0; j < p; ++j) z.segment(j * m, m) = hist_u.col(j);
  for (Index j = 0; j < p; ++j) z.segment(p * m + j * d, d) = hist_y.col(j);
  return z;
}

}  // namespace iofpg
