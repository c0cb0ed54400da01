#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "iofpg/errors.hpp"
#include "iofpg/pg.hpp"

namespace iofpg::detail {

// Shared first-order descent loop for the IOF and SOF parameterizations.
// Eval maps a gain to (J, grad) and throws InstabilityError outside the
// feasible set. The relative gap is measured against Jstar (NaN disables
// gap-based stopping).
struct DescentOutcome {
  Eigen::MatrixXd K;
  std::vector<TraceRecord> trace;
  bool converged = false;
  bool stalled = false;
  long iters = 0;
};

template <typename Eval>
DescentOutcome descent_loop(Eval&& eval, Eigen::MatrixXd K0, const PgConfig& cfg,
                            double Jstar) {
  DescentOutcome out;
  auto gap_of = [&](double J) { return (J - Jstar) / std::abs(Jstar); };

  double J;
  Eigen::MatrixXd grad;
  std::tie(J, grad) = eval(K0);

  Eigen::MatrixXd K = std::move(K0);
  auto record = [&](long iter) {
    out.trace.push_back({iter, J, gap_of(J), grad.norm()});
  };
  record(0);

  const double eta_max = cfg.eta * 1e6;
  const double eta_min = cfg.eta * 1e-15;
  double eta = cfg.eta;

  long i = 0;
  for (; i < cfg.max_iters; ++i) {
    if (gap_of(J) <= cfg.gap_tol) {
      out.converged = true;
      break;
    }
    if (cfg.grad_tol > 0.0 && grad.norm() <= cfg.grad_tol) {
      out.converged = true;
      break;
    }

    if (cfg.line_search) {
      eta = std::min(2.0 * eta, eta_max);
      bool accepted = false;
      const double gg = grad.squaredNorm();
      while (eta >= eta_min) {
        Eigen::MatrixXd K_try = K - eta * grad;
        try {
          auto [J_try, grad_try] = eval(K_try);
          if (J_try <= J - cfg.armijo * eta * gg) {
            K = std::move(K_try);
            J = J_try;
            grad = std::move(grad_try);
            accepted = true;
            break;
          }
        } catch (const InstabilityError&) {
          // fall through to halving
        }
        eta *= 0.5;
      }
      if (!accepted) {
        out.stalled = true;
        break;
      }
    } else {
      Eigen::MatrixXd K_try = K - cfg.eta * grad;
      try {
        std::tie(J, grad) = eval(K_try);
      } catch (const InstabilityError& e) {
        throw StepRejectedError(
            std::string("descent: fixed-step update left the feasible set (") +
                e.what() + ")",
            e.spectral_radius);
      }
      K = std::move(K_try);
    }

    if ((i + 1) % cfg.record_every == 0) record(i + 1);
  }
  out.iters = i;
  if (out.trace.empty() || out.trace.back().iter != i) record(i);
  out.K = std::move(K);
  return out;
}

}  // namespace iofpg::detail
