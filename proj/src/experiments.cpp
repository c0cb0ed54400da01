#include "iofpg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "iofpg/fixtures.hpp"

namespace iofpg {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

void parallel_trials(int trials, const std::function<void(int)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(trials));
  if (workers <= 1) {
    for (int t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (true) {
      const int t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

MatrixXd normalized_random_gain(const IofProblem& prob, double target_rho, Rng& rng) {
  const double rho_open = spectral_radius(prob.sys.A);
  if (rho_open >= target_rho) {
    std::ostringstream os;
    os << "normalized_random_gain: open-loop radius " << rho_open
       << " is not below the target " << target_rho;
    throw GenerationError(os.str());
  }
  for (int attempt = 0; attempt < 32; ++attempt) {
    const MatrixXd K = gaussian_matrix(prob.m(), prob.q(), rng);
    auto radius_at = [&](double s) { return spectral_radius(prob.closed_loop(s * K)); };
    double hi = 1.0;
    bool bracketed = false;
    for (int it = 0; it < 200; ++it) {
      if (radius_at(hi) >= target_rho) {
        bracketed = true;
        break;
      }
      hi *= 2.0;
    }
    if (!bracketed) continue;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (radius_at(mid) < target_rho ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    if (std::abs(radius_at(s) - target_rho) <= 1e-9) return s * K;
  }
  throw GenerationError("normalized_random_gain: bisection failed to pin the radius");
}

double log_gap_iteration_correlation(const std::vector<TraceRecord>& trace,
                                     double floor_gap) {
  std::vector<double> xs, ys;
  for (const auto& r : trace) {
    if (r.gap > floor_gap) {
      xs.push_back(static_cast<double>(r.iter));
      ys.push_back(std::log10(r.gap));
    }
  }
  const std::size_t n = xs.size();
  if (n < 3) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

json check_entry(const std::string& name, bool passed, const std::string& detail) {
  return json{{"name", name}, {"passed", passed}, {"detail", detail}};
}

}  // namespace

json run_check(const json& system_json) {
  json report;
  report["checks"] = json::array();
  auto& checks = report["checks"];
  bool all = true;
  auto add = [&](const std::string& name, bool passed, const std::string& detail) {
    checks.push_back(check_entry(name, passed, detail));
    all = all && passed;
  };

  MatrixXd A, B, C;
  try {
    if (!system_json.contains("A") || !system_json.contains("B") ||
        !system_json.contains("C")) {
      throw ConfigError("expected {A, B, C}");
    }
    A = mat_from_json(system_json.at("A"));
    B = mat_from_json(system_json.at("B"));
    C = mat_from_json(system_json.at("C"));
    if (A.rows() != A.cols() || B.rows() != A.rows() || C.cols() != A.rows()) {
      throw DimensionError("inconsistent A/B/C shapes");
    }
    add("parse", true, "A/B/C loaded");
  } catch (const Error& e) {
    add("parse", false, e.what());
    report["passed"] = false;
    return report;
  }

  const Eigen::Index n = A.rows();
  const bool controllable =
      numerical_rank(controllability_matrix(A, B, static_cast<int>(n))) == n;
  add("assumption2.controllability", controllable,
      controllable ? "(A,B) controllable" : "(A,B) controllability rank test failed");
  const bool observable =
      numerical_rank(observability_matrix(A, C, static_cast<int>(n))) == n;
  add("assumption2.observability", observable,
      observable ? "(C,A) observable" : "(C,A) observability rank test failed");
  if (!controllable || !observable) {
    report["passed"] = false;
    return report;
  }

  const LtiSystem sys(A, B, C);
  const MatrixXd Q = MatrixXd::Identity(sys.d(), sys.d());
  const MatrixXd R = 0.01 * MatrixXd::Identity(sys.m(), sys.m());
  const IofProblem prob = make_problem(sys, Q, R);
  report["p"] = prob.rec.idx.p;
  report["q"] = prob.rec.idx.q;
  report["o"] = prob.rec.idx.o;
  report["c"] = prob.rec.idx.c;
  add("structural_indices", true,
      "o=" + std::to_string(prob.rec.idx.o) + " c=" + std::to_string(prob.rec.idx.c) +
          " p=" + std::to_string(prob.rec.idx.p) + " q=" + std::to_string(prob.rec.idx.q));

  // Assumption 1 under both initial-state conventions used by the harness.
  {
    const MatrixXd Sigma0w = warmup_covariance(prob);
    const double mineig = min_eigenvalue_sym(Sigma0w);
    add("assumption1.warmup_covariance", mineig > 0.0,
        "min eigenvalue of Cp Cp' + A^p A^p' = " + format_double(mineig));
  }

  // State recovery along simulated trajectories.
  {
    Rng rng(12345);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const int p = prob.rec.idx.p;
      Eigen::VectorXd x = gaussian_vector(sys.n(), rng);
      MatrixXd us(sys.m(), p + 8), ys(sys.d(), p + 8);
      for (int t = 0; t < p + 8; ++t) {
        us.col(t) = gaussian_vector(sys.m(), rng);
        ys.col(t) = sys.C * x;
        const Eigen::VectorXd x_next = sys.A * x + sys.B * us.col(t);
        if (t + 1 >= p) {
          MatrixXd hu(sys.m(), p), hy(sys.d(), p);
          for (int j = 0; j < p; ++j) {
            hu.col(j) = us.col(t - j);
            hy.col(j) = ys.col(t - j);
          }
          // history is relative to time t+1 here
          const Eigen::VectorXd z = assemble_feedback_vector(hu, hy);
          worst = std::max(worst, (x_next - prob.rec.S * z).cwiseAbs().maxCoeff());
        }
        x = x_next;
      }
    }
    add("state_recovery", worst <= 1e-9, "max |x_t - S z_t| = " + format_double(worst));
  }

  // Optimal gain residual and gradient-dominance spot checks.
  try {
    const MatrixXd Sigma0 = MatrixXd::Identity(sys.n(), sys.n());
    const SolutionGeometry geom = optimal_gain(prob, Sigma0);
    const MatrixXd KSdag = geom.Kstar * prob.rec.Sdag;
    const MatrixXd Acl = sys.A - sys.B * KSdag;
    const double resid = (geom.Pstar - prob.Qc - KSdag.transpose() * prob.R * KSdag -
                          Acl.transpose() * geom.Pstar * Acl)
                             .norm();
    add("optimal_lyapunov_residual", resid <= 1e-7 * (1.0 + geom.Pstar.norm()),
        "residual = " + format_double(resid));

    Rng rng(777);
    int tested = 0;
    bool pl_ok = true;
    std::string pl_detail;
    const MatrixXd K0 = MatrixXd::Zero(prob.m(), prob.q());
    std::vector<MatrixXd> candidates{K0};
    while (candidates.size() < 6) {
      const MatrixXd K = 0.5 * gaussian_matrix(prob.m(), prob.q(), rng);
      if (is_stabilizing(prob, K).stabilizing) candidates.push_back(K);
    }
    for (const auto& K : candidates) {
      if (!is_stabilizing(prob, K).stabilizing) continue;
      const CostCertificate cert = exact_cost(prob, Sigma0, K);
      const PlCertificate pl = pl_certificate(prob, geom, cert);
      ++tested;
      if (pl.lhs > pl.rhs + 1e-9 * (1.0 + std::abs(pl.rhs))) {
        pl_ok = false;
        pl_detail = "violated: lhs=" + format_double(pl.lhs) +
                    " rhs=" + format_double(pl.rhs);
        break;
      }
    }
    add("gradient_dominance_spot_checks", pl_ok,
        pl_ok ? "lhs <= rhs on " + std::to_string(tested) + " gains" : pl_detail);
  } catch (const Error& e) {
    add("optimal_gain", false, e.what());
  }

  report["passed"] = all;
  return report;
}

namespace {

json fig2_metadata(const IofProblem& prob, const Fig2Options& opt) {
  return json{{"experiment", "fig2"},
              {"trials", opt.trials},
              {"eta", opt.eta},
              {"max_iters", opt.max_iters},
              {"gap_tol", opt.gap_tol},
              {"record_every", opt.record_every},
              {"seed", opt.seed},
              {"sigma0", "identity"},
              {"initializer",
               "random Gaussian K0 rescaled so rho(A - B K0 Sdag) = " +
                   format_double(opt.init_rho) +
                   " (closed-loop normalization; the raw A - B K0 expression is not "
                   "shape-consistent for m x q gains)"},
              {"system_fingerprint", system_fingerprint(prob.sys)}};
}

}  // namespace

json run_fig2(const IofProblem& prob, const fs::path& out_dir, const Fig2Options& opt) {
  if (opt.trials < 1) throw ConfigError("run_fig2: trials must be >= 1");
  fs::create_directories(out_dir);

  const MatrixXd Sigma0 = MatrixXd::Identity(prob.n(), prob.n());
  const SolutionGeometry geom = optimal_gain(prob, Sigma0);
  PgConfig cfg;
  cfg.eta = opt.eta;
  cfg.line_search = false;
  cfg.max_iters = opt.max_iters;
  cfg.gap_tol = opt.gap_tol;
  cfg.record_every = opt.record_every;

  std::vector<PgRun> runs(opt.trials);
  parallel_trials(opt.trials, [&](int t) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(t)));
    const MatrixXd K0 = normalized_random_gain(prob, opt.init_rho, rng);
    runs[t] = run_pg(prob, geom, Sigma0, K0, cfg);
  });

  json summary = fig2_metadata(prob, opt);
  summary["Jstar"] = geom.Jstar;
  auto& per_trial = summary["per_trial"];
  per_trial = json::array();
  std::size_t max_len = 0;
  int converged = 0;
  for (int t = 0; t < opt.trials; ++t) {
    const PgRun& run = runs[t];
    const fs::path csv = out_dir / ("fig2_trial_" + std::to_string(t) + ".csv");
    write_pg_trace_csv(csv, run.trace);
    converged += run.converged ? 1 : 0;
    per_trial.push_back(json{{"trial", t},
                             {"converged", run.converged},
                             {"iters", run.iters},
                             {"final_gap", run.trace.back().gap},
                             {"log_gap_correlation",
                              log_gap_iteration_correlation(run.trace, opt.gap_tol)},
                             {"limit_error", run.limit_error},
                             {"trace_file", csv.filename().string()}});
    max_len = std::max(max_len, run.trace.size());
  }
  summary["converged_trials"] = converged;
  summary["all_converged"] = (converged == opt.trials);

  // Aligned mean/variance of the gap; finished trials hold their last value.
  {
    std::ofstream out(out_dir / "fig2_mean.csv");
    out << "iter,mean_gap,var_gap\n";
    for (std::size_t k = 0; k < max_len; ++k) {
      double mean = 0.0;
      long iter = 0;
      for (const auto& run : runs) {
        const auto& rec = k < run.trace.size() ? run.trace[k] : run.trace.back();
        mean += rec.gap;
        if (k < run.trace.size()) iter = rec.iter;
      }
      mean /= opt.trials;
      double var = 0.0;
      for (const auto& run : runs) {
        const auto& rec = k < run.trace.size() ? run.trace[k] : run.trace.back();
        var += (rec.gap - mean) * (rec.gap - mean);
      }
      var /= std::max(1, opt.trials - 1);
      out << iter << ',' << format_double(mean) << ',' << format_double(var) << '\n';
    }
  }
  save_json(out_dir / "fig2_summary.json", summary);
  return summary;
}

json run_fig3(const IofProblem& prob, const fs::path& out_dir, const Fig3Options& opt) {
  if (opt.trials < 1) throw ConfigError("run_fig3: trials must be >= 1");
  if (opt.r <= 0.0) throw DomainError("run_fig3: smoothing radius must be > 0");
  fs::create_directories(out_dir);

  const MatrixXd Sigma0 = warmup_covariance(prob);
  const SolutionGeometry geom = optimal_gain(prob, Sigma0);
  const MatrixXd K0 = MatrixXd::Zero(prob.m(), prob.q());
  const double initial_gap =
      (exact_cost(prob, Sigma0, K0).J - geom.Jstar) / std::abs(geom.Jstar);

  std::vector<ZoRun> runs(opt.trials);
  parallel_trials(opt.trials, [&](int t) {
    ZoConfig cfg;
    cfg.N = opt.N;
    cfg.eta = opt.eta;
    cfg.r = opt.r;
    cfg.grad_clip = opt.grad_clip;
    cfg.record_every = opt.record_every;
    cfg.rollout.T = opt.T;
    cfg.rollout.seed = derive_seed(opt.seed, 1000 + static_cast<std::uint64_t>(t));
    runs[t] = run_zero_order(prob, K0, cfg, &geom);
  });

  json summary{{"experiment", "fig3"},
               {"trials", opt.trials},
               {"N", opt.N},
               {"eta", opt.eta},
               {"r", opt.r},
               {"T", opt.T},
               {"grad_clip", opt.grad_clip},
               {"record_every", opt.record_every},
               {"seed", opt.seed},
               {"sigma0", "warmup (Cp Cp' + A^p A^p')"},
               {"gap_columns", "gap = exact model-based gap; J_hat = empirical cost"},
               {"Jstar", geom.Jstar},
               {"initial_gap", initial_gap},
               {"system_fingerprint", system_fingerprint(prob.sys)}};
  auto& per_trial = summary["per_trial"];
  per_trial = json::array();
  bool any_warning = false;
  for (int t = 0; t < opt.trials; ++t) {
    const ZoRun& run = runs[t];
    const fs::path csv = out_dir / ("fig3_trial_" + std::to_string(t) + ".csv");
    write_zo_trace_csv(csv, run.trace);
    any_warning = any_warning || run.divergence_warning;

    // Median exact gap over the trailing 1000 iterations.
    std::vector<double> tail;
    for (const auto& rec : run.trace) {
      if (rec.iter > opt.N - 1000) tail.push_back(rec.gap);
    }
    std::sort(tail.begin(), tail.end());
    const double median_tail_gap = tail.empty() ? 0.0 : tail[tail.size() / 2];
    per_trial.push_back(json{{"trial", t},
                             {"median_final_1k_gap", median_tail_gap},
                             {"final_gap", run.trace.back().gap},
                             {"n_saturated", run.n_saturated},
                             {"divergence_warning", run.divergence_warning},
                             {"trace_file", csv.filename().string()}});
  }
  summary["any_divergence_warning"] = any_warning;

  // Across-trial mean/variance band of the exact gap per recorded index.
  {
    std::size_t len = runs[0].trace.size();
    for (const auto& run : runs) len = std::min(len, run.trace.size());
    std::ofstream out(out_dir / "fig3_mean.csv");
    out << "iter,mean_gap,var_gap\n";
    for (std::size_t k = 0; k < len; ++k) {
      double mean = 0.0;
      for (const auto& run : runs) mean += run.trace[k].gap;
      mean /= opt.trials;
      double var = 0.0;
      for (const auto& run : runs) {
        var += (run.trace[k].gap - mean) * (run.trace[k].gap - mean);
      }
      var /= std::max(1, opt.trials - 1);
      out << runs[0].trace[k].iter << ',' << format_double(mean) << ','
          << format_double(var) << '\n';
    }
  }
  save_json(out_dir / "fig3_summary.json", summary);
  return summary;
}

namespace {

struct Table1Row {
  std::string label;
  double optimal = 0.0;
  std::vector<double> iof_final;
  std::vector<double> sof_final;
  int iof_excluded = 0;
  int sof_excluded = 0;
};

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

json run_table1(const IofProblem& prob_d2, const IofProblem& prob_d4,
                const fs::path& out_dir, const Table1Options& opt) {
  if (opt.trials < 1) throw ConfigError("run_table1: trials must be >= 1");
  fs::create_directories(out_dir);

  std::vector<Table1Row> rows;
  const IofProblem* probs[2] = {&prob_d2, &prob_d4};
  const char* names[2] = {"d2", "d4"};

  for (int sidx = 0; sidx < 2; ++sidx) {
    const IofProblem& prob = *probs[sidx];
    const MatrixXd K0 = MatrixXd::Zero(prob.m(), prob.q());
    const MatrixXd Ks0 = MatrixXd::Zero(prob.m(), prob.d());

    // Model-based row.
    {
      Table1Row row;
      row.label = std::string("model-based (") + names[sidx] + ")";
      const MatrixXd Sigma0 = MatrixXd::Identity(prob.n(), prob.n());
      const SolutionGeometry geom = optimal_gain(prob, Sigma0);
      row.optimal = geom.Jstar;
      row.iof_final.resize(opt.trials);
      row.sof_final.resize(opt.trials);
      PgConfig cfg;
      cfg.eta = opt.eta;
      cfg.line_search = false;
      cfg.max_iters = opt.iters;
      cfg.gap_tol = 1e-14;
      cfg.record_every = opt.iters;  // end points only
      parallel_trials(opt.trials, [&](int t) {
        const PgRun iof = run_pg(prob, geom, Sigma0, K0, cfg);
        row.iof_final[t] = iof.trace.back().J;
        const PgRun sof = run_sof_pg(prob, Sigma0, Ks0, cfg, geom.Jstar);
        row.sof_final[t] = sof.trace.back().J;
      });
      rows.push_back(std::move(row));
    }

    // Sample-based row.
    {
      Table1Row row;
      row.label = std::string("sample-based (") + names[sidx] + ")";
      const MatrixXd Sigma0 = warmup_covariance(prob);
      const SolutionGeometry geom = optimal_gain(prob, Sigma0);
      row.optimal = geom.Jstar;
      std::vector<double> iof(opt.trials), sof(opt.trials);
      parallel_trials(opt.trials, [&](int t) {
        ZoConfig cfg;
        cfg.N = opt.iters;
        cfg.eta = opt.eta;
        cfg.r = opt.r;
        cfg.grad_clip = opt.grad_clip;
        cfg.rollout.T = opt.T;
        cfg.record_every = opt.iters;
        cfg.rollout.seed =
            derive_seed(opt.seed, 2000 + 100 * sidx + static_cast<std::uint64_t>(t));
        const ZoRun iof_run = run_zero_order(prob, K0, cfg, &geom);
        iof[t] = iof_run.trace.back().J;  // exact cost of the final policy

        cfg.rollout.seed =
            derive_seed(opt.seed, 3000 + 100 * sidx + static_cast<std::uint64_t>(t));
        const ZoRun sof_run = run_zero_order_sof(prob, Ks0, cfg, &geom);
        sof[t] = sof_run.trace.back().J;
      });
      for (double v : iof) {
        if (std::isfinite(v)) {
          row.iof_final.push_back(v);
        } else {
          ++row.iof_excluded;
        }
      }
      for (double v : sof) {
        if (std::isfinite(v)) {
          row.sof_final.push_back(v);
        } else {
          ++row.sof_excluded;
        }
      }
      rows.push_back(std::move(row));
    }
  }

  json report{{"experiment", "table1"},
              {"trials", opt.trials},
              {"iters", opt.iters},
              {"eta", opt.eta},
              {"T", opt.T},
              {"r", opt.r},
              {"seed", opt.seed},
              {"sigma0", "identity for model-based rows, warmup for sample-based rows"},
              {"fingerprint_d2", system_fingerprint(prob_d2.sys)},
              {"fingerprint_d4", system_fingerprint(prob_d4.sys)}};
  auto& jrows = report["rows"];
  jrows = json::array();
  for (const auto& row : rows) {
    jrows.push_back(json{{"label", row.label},
                         {"optimal", row.optimal},
                         {"iof_mean", mean_of(row.iof_final)},
                         {"sof_mean", mean_of(row.sof_final)},
                         {"iof_per_trial", row.iof_final},
                         {"sof_per_trial", row.sof_final},
                         {"iof_excluded", row.iof_excluded},
                         {"sof_excluded", row.sof_excluded}});
  }
  save_json(out_dir / "table1.json", report);
  return report;
}

}  // namespace iofpg
