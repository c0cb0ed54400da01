#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "iofpg/experiments.hpp"
#include "iofpg/fixtures.hpp"

using namespace iofpg;
using Eigen::MatrixXd;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("iofpg_exp_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line)) ++k;
  return k;
}

}  // namespace

TEST_CASE("check passes on the benchmark plant and reports p = 2") {
  const json report = run_check(system_to_json(benchmark_system_d2()));
  CHECK(report.at("passed").get<bool>());
  CHECK(report.at("p").get<int>() == 2);
  CHECK(report.at("q").get<int>() == 8);
}

TEST_CASE("check names the observability failure for C = 0") {
  json j = system_to_json(benchmark_system_d2());
  j["C"] = mat_to_json(MatrixXd::Zero(2, 4));
  const json report = run_check(j);
  CHECK_FALSE(report.at("passed").get<bool>());
  bool found = false;
  for (const auto& chk : report.at("checks")) {
    if (chk.at("name") == "assumption2.observability") {
      found = true;
      CHECK_FALSE(chk.at("passed").get<bool>());
    }
  }
  CHECK(found);
}

TEST_CASE("check reports a parse failure for malformed matrices") {
  const json report = run_check(json{{"A", 1}, {"B", 2}, {"C", 3}});
  CHECK_FALSE(report.at("passed").get<bool>());
  CHECK(report.at("checks")[0].at("name") == "parse");
}

TEST_CASE("normalized initializers hit the requested closed-loop radius") {
  const IofProblem prob = benchmark_problem_d2();
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const MatrixXd K0 = normalized_random_gain(prob, 0.8, rng);
    CHECK(std::abs(spectral_radius(prob.closed_loop(K0)) - 0.8) <= 1e-9);
  }
  CHECK_THROWS_AS(normalized_random_gain(prob, 0.5, rng), GenerationError);
}

TEST_CASE("fig2 harness: converged trials, consistent files, deterministic reruns") {
  const IofProblem prob = benchmark_problem_d2();
  TempDir tmp;
  Fig2Options opt;
  opt.trials = 3;
  opt.max_iters = 20000;
  opt.gap_tol = 1e-6;
  opt.record_every = 4;
  opt.seed = 5;

  const json summary = run_fig2(prob, tmp.path / "a", opt);
  CHECK(summary.at("all_converged").get<bool>());
  CHECK(summary.at("per_trial").size() == 3);
  for (const auto& trial : summary.at("per_trial")) {
    CHECK(trial.at("converged").get<bool>());
    CHECK(trial.at("final_gap").get<double>() <= 1e-6);
    CHECK(trial.at("log_gap_correlation").get<double>() <= -0.99);
    // rows = records + header
    const long iters = trial.at("iters").get<long>();
    const std::size_t expected_records =
        1 + static_cast<std::size_t>(iters / opt.record_every) +
        ((iters % opt.record_every) ? 1 : 0);
    CHECK(line_count(tmp.path / "a" / trial.at("trace_file").get<std::string>()) ==
          expected_records + 1);
  }

  const json summary2 = run_fig2(prob, tmp.path / "b", opt);
  CHECK(summary.at("per_trial") == summary2.at("per_trial"));
  for (int t = 0; t < 3; ++t) {
    const std::string name = "fig2_trial_" + std::to_string(t) + ".csv";
    CHECK(slurp(tmp.path / "a" / name) == slurp(tmp.path / "b" / name));
  }
  CHECK(slurp(tmp.path / "a" / "fig2_mean.csv") == slurp(tmp.path / "b" / "fig2_mean.csv"));
}

TEST_CASE("fig3 harness: trace columns, determinism, and the r > 0 gate") {
  const IofProblem prob = benchmark_problem_d2();
  TempDir tmp;
  Fig3Options opt;
  opt.trials = 2;
  opt.N = 1500;
  opt.record_every = 10;
  opt.seed = 7;

  const json summary = run_fig3(prob, tmp.path / "a", opt);
  CHECK(summary.at("per_trial").size() == 2);
  CHECK(summary.at("initial_gap").get<double>() > 0.0);
  const std::string header = [&] {
    std::ifstream in(tmp.path / "a" / "fig3_trial_0.csv");
    std::string line;
    std::getline(in, line);
    return line;
  }();
  CHECK(header == "iter,J,gap,grad_fro,J_hat,saturated");
  CHECK(line_count(tmp.path / "a" / "fig3_trial_0.csv") == 1 + 1 + 1500 / 10);

  const json summary2 = run_fig3(prob, tmp.path / "b", opt);
  CHECK(summary.at("per_trial") == summary2.at("per_trial"));
  CHECK(slurp(tmp.path / "a" / "fig3_trial_1.csv") == slurp(tmp.path / "b" / "fig3_trial_1.csv"));

  Fig3Options bad = opt;
  bad.r = 0.0;
  CHECK_THROWS_AS(run_fig3(prob, tmp.path / "c", bad), DomainError);
}

TEST_CASE("table1 harness: means recompute from per-trial entries and respect J*") {
  const IofProblem d2 = benchmark_problem_d2();
  const IofProblem d4 = benchmark_problem_d4();
  TempDir tmp;
  Table1Options opt;
  opt.trials = 2;
  opt.iters = 1500;
  opt.seed = 11;

  const json report = run_table1(d2, d4, tmp.path, opt);
  REQUIRE(report.at("rows").size() == 4);
  for (const auto& row : report.at("rows")) {
    const auto per_trial = row.at("iof_per_trial").get<std::vector<double>>();
    if (!per_trial.empty()) {
      double mean = 0.0;
      for (double v : per_trial) mean += v;
      mean /= per_trial.size();
      CHECK(row.at("iof_mean").get<double>() == doctest::Approx(mean).epsilon(1e-12));
      // cost of any stabilizing policy is bounded below by the optimum
      CHECK(row.at("optimal").get<double>() <=
            row.at("iof_mean").get<double>() * (1.0 + 1e-9));
    }
  }
}
