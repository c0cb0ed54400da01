#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "iofpg/errors.hpp"
#include "iofpg/matrix_ops.hpp"

namespace iofpg {

/// Discrete-time LTI plant x_{t+1} = A x_t + B u_t, y_t = C x_t.
///
/// Construction validates shapes, finiteness and the standing assumption
/// that (A,B) is controllable and (C,A) is observable (full n-block rank
/// tests); violations throw AssumptionError naming the failed test.
struct LtiSystem {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x m
  Eigen::MatrixXd C;  // d x n

  LtiSystem(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd C_);

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index d() const { return C.rows(); }
};

/// Stacked k-block observability matrix [C; CA; ...; CA^{k-1}] (kd x n).
Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                     int k);
Eigen::MatrixXd observability_matrix(const LtiSystem& sys, int k);

/// Stacked k-block controllability matrix [B, AB, ..., A^{k-1}B] (n x km).
Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A,
                                       const Eigen::MatrixXd& B, int k);
Eigen::MatrixXd controllability_matrix(const LtiSystem& sys, int k);

/// Observability index o, controllability index c, feedback horizon
/// p = max{o,c} and feedback dimension q = p(m+d).
struct StructuralIndices {
  int o = 0;
  int c = 0;
  int p = 0;
  Eigen::Index q = 0;
};

/// Smallest block counts achieving full rank. With fallback_full_order the
/// horizon is forced to p = n (usable when only the order is known).
StructuralIndices structural_indices(const LtiSystem& sys,
                                     bool fallback_full_order = false);

/// The state-recovery machinery for a horizon p: x_t = S z_{t,p} where
/// z_{t,p} stacks [u_{t-1};...;u_{t-p}; y_{t-1};...;y_{t-p}].
struct RecoveryOperators {
  StructuralIndices idx;
  Eigen::MatrixXd Op;         // pd x n, [CA^{p-1}; ...; CA; C]
  Eigen::MatrixXd Cp;         // n x pm, [B, AB, ..., A^{p-1}B]
  Eigen::MatrixXd Tp;         // pd x pm, strictly causal block Toeplitz
  Eigen::MatrixXd S;          // n x q
  Eigen::MatrixXd Sdag;       // q x n, right pseudo-inverse of S
  Eigen::MatrixXd proj_perp;  // q x q projector onto col(Sdag), right-applied
};

RecoveryOperators build_recovery(const LtiSystem& sys, const StructuralIndices& idx);

/// (T A T^{-1}, T B, C T^{-1}); throws ConditioningError when cond(T)
/// exceeds the cap.
LtiSystem similarity_transform(const LtiSystem& sys, const Eigen::MatrixXd& T,
                               double cond_cap = 1e8);

/// Gaussian random plant; A rescaled to the requested spectral radius when
/// given; resampled until the standing assumption holds (cap 100 attempts).
LtiSystem random_system(Eigen::Index n, Eigen::Index m, Eigen::Index d,
                        std::uint64_t seed,
                        std::optional<double> stability_target = std::nullopt);

/// Stacks past inputs/outputs into z_{t,p}: u-block first, newest first
/// within each block. hist_u.col(j) / hist_y.col(j) hold u_{t-1-j} / y_{t-1-j}.
Eigen::VectorXd assemble_feedback_vector(const Eigen::MatrixXd& hist_u,
                                         const Eigen::MatrixXd& hist_y);

}  // namespace iofpg
