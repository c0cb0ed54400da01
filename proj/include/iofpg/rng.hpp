#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace iofpg {

/// Deterministic per-task seed derivation (splitmix64 over base ^ index).
/// Used everywhere a top-level seed fans out into independent streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      M(i, j) = gauss(rng);
    }
  }
  return M;
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index size, Rng& rng) {
  return gaussian_matrix(size, 1, rng);
}

/// Uniform draw from the unit Frobenius sphere of rows x cols matrices
/// (normalized Gaussian; resamples in the measure-zero degenerate case).
inline Eigen::MatrixXd sphere_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  while (true) {
    Eigen::MatrixXd U = gaussian_matrix(rows, cols, rng);
    const double norm = U.norm();
    if (norm > 1e-12) return U / norm;
  }
}

}  // namespace iofpg
