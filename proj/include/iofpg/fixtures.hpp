#pragma once

#include <cstdint>

#include "iofpg/iof.hpp"

namespace iofpg {

/// The 4-state, 2-input, 2-output benchmark plant used throughout the
/// experiment suite (open-loop stable, p = 2, q = 8).
LtiSystem benchmark_system_d2();

/// Output/input weights for the benchmark study: Q = I_d, R = 0.01 I_m.
Eigen::MatrixXd benchmark_Q(const LtiSystem& sys);
Eigen::MatrixXd benchmark_R(const LtiSystem& sys);

IofProblem benchmark_problem_d2();

/// Seed-stamped random companion plant with d = n = 4 and invertible,
/// well-conditioned C (spectral radius rescaled to 0.8); the comparison
/// case where static output feedback can recover full state information.
extern const std::uint64_t kBenchmarkD4Seed;
LtiSystem benchmark_system_d4();
IofProblem benchmark_problem_d4();

}  // namespace iofpg
