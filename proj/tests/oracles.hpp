#pragma once

// Test-only oracles, independent of the library's solver paths.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace oracles {

using Eigen::MatrixXd;

/// Spectral radius via characteristic polynomial: Faddeev-LeVerrier for the
/// coefficients, Durand-Kerner for the roots. Independent of any Schur or
/// Hessenberg eigensolver.
inline double char_poly_spectral_radius(const MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  // p(x) = x^n + c[1] x^{n-1} + ... + c[n]
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  MatrixXd M = MatrixXd::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    M = A * M + c[k - 1] * MatrixXd::Identity(n, n);
    c[k] = -(A * M).trace() / k;
  }
  using cplx = std::complex<double>;
  std::vector<cplx> roots(n);
  cplx seed(0.4, 0.9);
  cplx z(1.0, 0.0);
  for (int i = 0; i < n; ++i) {
    roots[i] = z;
    z *= seed;
  }
  auto eval = [&](cplx x) {
    cplx v = c[0];
    for (int k = 1; k <= n; ++k) v = v * x + c[k];
    return v;
  };
  for (int iter = 0; iter < 500; ++iter) {
    double shift = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx denom(1.0, 0.0);
      for (int j = 0; j < n; ++j) {
        if (j != i) denom *= roots[i] - roots[j];
      }
      const cplx delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      shift = std::max(shift, std::abs(delta));
    }
    if (shift < 1e-14) break;
  }
  double rho = 0.0;
  for (const auto& r : roots) rho = std::max(rho, std::abs(r));
  return rho;
}

/// Truncated-series solution of X = W + M X M' (pass M = Acl' for the
/// observability form, M = Acl for the controllability form):
/// X ~= sum_{t=0}^{T} M^t W (M')^t.
inline MatrixXd series_lyapunov(const MatrixXd& M, const MatrixXd& W, int T) {
  MatrixXd X = W;
  MatrixXd Mt = M;
  for (int t = 1; t <= T; ++t) {
    X += Mt * W * Mt.transpose();
    Mt = M * Mt;
  }
  return X;
}

/// Central-difference gradient of a scalar function of a matrix.
inline MatrixXd finite_difference_gradient(
    const std::function<double(const MatrixXd&)>& f, const MatrixXd& K,
    double h = 1e-6) {
  MatrixXd g(K.rows(), K.cols());
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      MatrixXd Kp = K, Km = K;
      Kp(i, j) += h;
      Km(i, j) -= h;
      g(i, j) = (f(Kp) - f(Km)) / (2.0 * h);
    }
  }
  return g;
}

/// Plain Riccati value iteration written directly from the recursion, as an
/// independent code path for cross-checking the library's DARE solver.
inline MatrixXd riccati_value_iteration(const MatrixXd& A, const MatrixXd& B,
                                        const MatrixXd& Qc, const MatrixXd& R,
                                        int iters) {
  MatrixXd P = Qc;
  for (int k = 0; k < iters; ++k) {
    const MatrixXd BtPA = B.transpose() * P * A;
    const MatrixXd G = (R + B.transpose() * P * B).inverse() * BtPA;
    P = Qc + A.transpose() * P * A - BtPA.transpose() * G;
    P = 0.5 * (P + P.transpose());
  }
  return P;
}

}  // namespace oracles
