#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "iofpg/experiments.hpp"
#include "iofpg/fixtures.hpp"

namespace fs = std::filesystem;
using namespace iofpg;

namespace {

// System sources accepted everywhere: a JSON fixture path, the bundled
// benchmarks ("d2", "d4"), or "random:n,m,d[,rho]".
LtiSystem resolve_system(const std::string& source, std::uint64_t seed) {
  if (source == "d2") return benchmark_system_d2();
  if (source == "d4") return benchmark_system_d4();
  if (source.rfind("random:", 0) == 0) {
    int n = 0, m = 0, d = 0;
    double rho = 0.8;
    const int fields =
        std::sscanf(source.c_str(), "random:%d,%d,%d,%lf", &n, &m, &d, &rho);
    if (fields < 3) {
      throw ConfigError("system spec must be random:n,m,d[,rho]; got " + source);
    }
    return random_system(n, m, d, seed, rho);
  }
  return load_system(source);
}

IofProblem resolve_problem(const std::string& source, std::uint64_t seed) {
  LtiSystem sys = resolve_system(source, seed);
  Eigen::MatrixXd Q = benchmark_Q(sys);
  Eigen::MatrixXd R = benchmark_R(sys);
  return make_problem(std::move(sys), std::move(Q), std::move(R));
}

// Optional JSON config file; CLI flags win over file values.
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  return load_json(path);
}

template <typename T>
void maybe(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

int do_check(const std::string& system, std::uint64_t seed) {
  json system_json;
  if (system == "d2") {
    system_json = system_to_json(benchmark_system_d2());
  } else if (system == "d4") {
    system_json = system_to_json(benchmark_system_d4());
  } else if (system.rfind("random:", 0) == 0) {
    system_json = system_to_json(resolve_system(system, seed));
  } else {
    system_json = load_json(system);
  }
  const json report = run_check(system_json);
  std::cout << report.dump(2) << std::endl;
  return report.at("passed").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-gradient methods for LQ control of partially observed systems "
               "under input-output feedback"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int trials = 20;
  app.add_option("--config", config_path, "JSON config file (flags override)");
  app.add_option("--seed", seed, "top-level seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--trials", trials, "number of independent trials");

  auto* check = app.add_subcommand("check", "diagnose a system fixture");
  std::string check_system = "d2";
  check->add_option("--system", check_system, "fixture path | d2 | d4 | random:n,m,d[,rho]");

  auto* fig2 = app.add_subcommand("fig2", "model-based PG convergence study");
  Fig2Options f2;
  fig2->add_option("--eta", f2.eta, "stepsize");
  fig2->add_option("--iters", f2.max_iters, "iteration budget");
  fig2->add_option("--gap-tol", f2.gap_tol, "stopping gap");
  fig2->add_option("--record-every", f2.record_every, "trace stride");
  std::string fig2_system = "d2";
  fig2->add_option("--system", fig2_system, "system source");

  auto* fig3 = app.add_subcommand("fig3", "sample-based (zero-order) convergence study");
  Fig3Options f3;
  fig3->add_option("--iters", f3.N, "iteration count");
  fig3->add_option("--eta", f3.eta, "stepsize");
  fig3->add_option("--radius", f3.r, "smoothing radius");
  fig3->add_option("--horizon", f3.T, "rollout horizon T");
  fig3->add_option("--grad-clip", f3.grad_clip, "estimate norm cap (0 disables)");
  fig3->add_option("--record-every", f3.record_every, "trace stride");
  std::string fig3_system = "d2";
  fig3->add_option("--system", fig3_system, "system source");

  auto* table1 = app.add_subcommand("table1", "Optimal/IOF/SOF comparison table");
  Table1Options t1;
  table1->add_option("--iters", t1.iters, "iterations per run");
  table1->add_option("--eta", t1.eta, "stepsize for both parameterizations");
  table1->add_option("--horizon", t1.T, "rollout horizon T (sample-based rows)");
  table1->add_option("--radius", t1.r, "smoothing radius (sample-based rows)");
  std::string table1_d2 = "d2", table1_d4 = "d4";
  table1->add_option("--system-d2", table1_d2, "rank-deficient-C system source");
  table1->add_option("--system-d4", table1_d4, "invertible-C system source");

  auto* pg_run = app.add_subcommand("pg-run", "single model-based PG run");
  std::string pg_system = "d2", pg_init = "zero";
  PgConfig pg_cfg;
  pg_cfg.line_search = false;
  long pg_iters = 30000;
  pg_run->add_option("--system", pg_system, "system source");
  pg_run->add_option("--eta", pg_cfg.eta, "stepsize");
  pg_run->add_option("--iters", pg_iters, "iteration budget");
  pg_run->add_option("--gap-tol", pg_cfg.gap_tol, "stopping gap");
  pg_run->add_option("--record-every", pg_cfg.record_every, "trace stride");
  pg_run->add_flag("--line-search", pg_cfg.line_search, "enable backtracking line search");
  pg_run->add_option("--init", pg_init, "zero | rho:<target> (random, normalized)");

  auto* zo_run = app.add_subcommand("zo-run", "single sample-based run");
  std::string zo_system = "d2";
  Fig3Options zo_opt;  // same knobs as fig3, single trial
  zo_run->add_option("--system", zo_system, "system source");
  zo_run->add_option("--iters", zo_opt.N, "iteration count");
  zo_run->add_option("--eta", zo_opt.eta, "stepsize");
  zo_run->add_option("--radius", zo_opt.r, "smoothing radius");
  zo_run->add_option("--horizon", zo_opt.T, "rollout horizon T");
  zo_run->add_option("--grad-clip", zo_opt.grad_clip, "estimate norm cap (0 disables)");
  zo_run->add_option("--record-every", zo_opt.record_every, "trace stride");

  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(config_path);
    maybe(cfg, "seed", seed);
    maybe(cfg, "out", out_dir);
    maybe(cfg, "trials", trials);

    if (check->parsed()) {
      maybe(cfg, "system", check_system);
      return do_check(check_system, seed);
    }
    if (fig2->parsed()) {
      maybe(cfg, "system", fig2_system);
      maybe(cfg, "eta", f2.eta);
      maybe(cfg, "iters", f2.max_iters);
      f2.trials = trials;
      f2.seed = seed;
      const json summary = run_fig2(resolve_problem(fig2_system, seed), out_dir, f2);
      std::cout << summary.dump(2) << std::endl;
      return summary.at("all_converged").get<bool>() ? 0 : 1;
    }
    if (fig3->parsed()) {
      maybe(cfg, "system", fig3_system);
      f3.trials = trials;
      f3.seed = seed;
      const json summary = run_fig3(resolve_problem(fig3_system, seed), out_dir, f3);
      std::cout << summary.dump(2) << std::endl;
      return 0;
    }
    if (table1->parsed()) {
      t1.trials = trials;
      t1.seed = seed;
      const json report = run_table1(resolve_problem(table1_d2, seed),
                                     resolve_problem(table1_d4, derive_seed(seed, 4)),
                                     out_dir, t1);
      std::cout << report.dump(2) << std::endl;
      return 0;
    }
    if (pg_run->parsed()) {
      const IofProblem prob = resolve_problem(pg_system, seed);
      const Eigen::MatrixXd Sigma0 =
          Eigen::MatrixXd::Identity(prob.n(), prob.n());
      const SolutionGeometry geom = optimal_gain(prob, Sigma0);
      Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(prob.m(), prob.q());
      if (pg_init.rfind("rho:", 0) == 0) {
        Rng rng(derive_seed(seed, 7));
        K0 = normalized_random_gain(prob, std::stod(pg_init.substr(4)), rng);
      } else if (pg_init != "zero") {
        throw ConfigError("pg-run: --init must be zero or rho:<target>");
      }
      pg_cfg.max_iters = pg_iters;
      const PgRun run = run_pg(prob, geom, Sigma0, K0, pg_cfg);
      fs::create_directories(out_dir);
      write_pg_trace_csv(fs::path(out_dir) / "pg_run.csv", run.trace);
      const json sidecar{{"experiment", "pg-run"},
                         {"seed", seed},
                         {"eta", pg_cfg.eta},
                         {"line_search", pg_cfg.line_search},
                         {"gap_tol", pg_cfg.gap_tol},
                         {"iters", run.iters},
                         {"converged", run.converged},
                         {"final_gap", run.trace.back().gap},
                         {"limit_error", run.limit_error},
                         {"sigma0", "identity"},
                         {"system_fingerprint", system_fingerprint(prob.sys)}};
      save_json(fs::path(out_dir) / "pg_run.json", sidecar);
      std::cout << sidecar.dump(2) << std::endl;
      return 0;
    }
    if (zo_run->parsed()) {
      const IofProblem prob = resolve_problem(zo_system, seed);
      zo_opt.trials = 1;
      zo_opt.seed = seed;
      const json summary = run_fig3(prob, out_dir, zo_opt);
      std::cout << summary.dump(2) << std::endl;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 2;
}
