// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 8 drives the CLI binary passed via --cli.

#include "phase_timing.hpp"
#include "support.hpp"

#include "sampdes/io.hpp"
#include "sampdes/oracle.hpp"
#include "sampdes/parallel.hpp"
#include "sampdes/problem.hpp"
#include "sampdes/projection.hpp"
#include "sampdes/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace sampdes;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Criterion>& results() {
  static std::vector<Criterion> r;
  return r;
}

void record(const std::string& name, bool pass, const std::string& detail) {
  results().push_back({name, pass, detail});
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// Desk-scale random instance with N <= 10, K <= 4, P <= 3 and K >= P, so
/// generic size-K subsets are invertible and the combinatorial problem is
/// well posed.
ProblemInstance draw_desk_instance(std::mt19937_64& rng) {
  const int p = 1 + static_cast<int>(rng() % 3);
  const int k_lo = std::max(2, p);
  const int k = k_lo + static_cast<int>(rng() % (4 - k_lo + 1));
  const int n = 5 + static_cast<int>(rng() % 6);
  std::normal_distribution<double> normal(0.0, 1.0);
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::linear_gaussian;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(p);
    for (int j = 0; j < p; ++j) x(j) = normal(rng);
    spec.designs.push_back(std::move(x));
  }
  return build_instance(spec, k);
}

// --- criterion 1: projection suite ------------------------------------------

void criterion_1() {
  const double start = now_seconds();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> phi_draw(0.1, 5.0);
  int checked = 0;
  std::string fail;

  for (int trial = 0; trial < 500 && fail.empty(); ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 7);
    const SymMatrix g = testsupport::random_symmetric(dim, rng);
    const double phi = phi_draw(rng);
    const ConstraintSpec spec = ConstraintSpec::corner(dim, phi);
    const ProjectionReport report = project_constrained(g, spec);
    const SymMatrix& u = report.result;

    if (std::abs(frobenius_inner(u, spec.e_matrix) - phi) > 1e-10 * std::max(1.0, phi)) {
      fail = "feasibility <U,E> at trial " + std::to_string(trial);
      break;
    }
    if (min_eigenvalue(u) < -1e-9) {
      fail = "PSD feasibility at trial " + std::to_string(trial);
      break;
    }
    const SymMatrix reproj = project_psd(u);
    if ((reproj.m() - u.m()).norm() > 1e-12 * std::max(1.0, u.frobenius_norm())) {
      fail = "idempotence at trial " + std::to_string(trial);
      break;
    }
    const SymMatrix pos = project_psd(g);
    const SymMatrix neg = project_psd(SymMatrix(Eigen::MatrixXd(-g.m())));
    if ((pos.m() - g.m() - neg.m()).norm() > 1e-12 * g.frobenius_norm()) {
      fail = "decomposition identity at trial " + std::to_string(trial);
      break;
    }
    const double dist = (u.m() - g.m()).norm();
    for (int s = 0; s < 1000; ++s) {
      const SymMatrix v = testsupport::random_constrained_point(spec, rng);
      if (dist > (v.m() - g.m()).norm() + 1e-9) {
        fail = "random feasible point beat the projection at trial " +
               std::to_string(trial);
        break;
      }
    }
    ++checked;
  }

  const double elapsed = now_seconds() - start;
  if (fail.empty() && elapsed >= 30.0) {
    fail = "runtime " + std::to_string(elapsed) + "s exceeds 30s";
  }
  std::ostringstream detail;
  detail << checked << "/500 matrices, 1000 feasible points each, " << std::fixed
         << std::setprecision(1) << elapsed << "s";
  record("1 projection suite", fail.empty(), fail.empty() ? detail.str() : fail);
}

// --- criterion 2: monotone root function ------------------------------------

void criterion_2() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> phi_draw(0.1, 1.0);
  std::string fail;
  for (int trial = 0; trial < 100 && fail.empty(); ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 7);
    const SymMatrix g = testsupport::random_symmetric(dim, rng);
    const double phi = phi_draw(rng);
    const ConstraintSpec spec = ConstraintSpec::corner(dim, phi);

    const double radius = 1.0 + g.frobenius_norm() + phi;
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
      const double lambda = -radius + 2.0 * radius * i / 49.0;
      const double f = constraint_residual(g, spec, lambda);
      if (f < prev - 1e-12) {
        fail = "f decreased at trial " + std::to_string(trial);
        break;
      }
      prev = f;
    }
    const ProjectionReport report = project_constrained(g, spec);
    if (report.residual > 1e-10) {
      fail = "root residual " + std::to_string(report.residual) + " at trial " +
             std::to_string(trial);
    }
  }
  record("2 monotone root function", fail.empty(),
         fail.empty() ? "100 draws, 50-point grids, residuals <= 1e-10" : fail);
}

// --- criterion 3: weak duality + factor diagnostic ---------------------------

double dual_value_gamma_factor(const ProblemInstance& inst, const DualState& state,
                               double factor) {
  const auto scores = candidate_scores(inst, state);
  const SelectionWeights w = select_top_k(scores, inst.budget);
  double weighted = 0.0;
  for (size_t n = 0; n < scores.size(); ++n) weighted += w.w[n] * scores[n];
  double edge_sum = 0.0;
  for (size_t p = 0; p < state.blocks.size(); ++p) {
    edge_sum += state.blocks[p].edge()(static_cast<int>(p));
  }
  return -weighted - factor * edge_sum;
}

void criterion_3() {
  std::mt19937_64 rng(103);
  int cases = 0;
  int factor1_violations = 0;
  double max_factor1_margin = -std::numeric_limits<double>::infinity();
  std::string fail;

  for (int i = 0; i < 50; ++i) {
    const ProblemInstance inst = draw_desk_instance(rng);
    const OracleResult oracle = exhaustive_best_subset(inst);
    const double bound = oracle.best_value + 1e-9 * (1.0 + std::abs(oracle.best_value));
    for (int s = 0; s < 100; ++s) {
      const DualState state = testsupport::random_feasible_dual_state(inst, rng);
      const double q2 = dual_value(inst, state);
      if (q2 > bound && fail.empty()) {
        fail = "violation at instance " + std::to_string(i) + " state " + std::to_string(s);
      }
      const double q1 = dual_value_gamma_factor(inst, state, 1.0);
      max_factor1_margin = std::max(max_factor1_margin, q1 - oracle.best_value);
      if (q1 > bound) ++factor1_violations;
      ++cases;
    }
  }
  {
    std::ostringstream detail;
    detail << cases << " cases, all dual values below the exhaustive optimum";
    record("3a weak duality (factor 2)", fail.empty(), fail.empty() ? detail.str() : fail);
  }
  {
    // The factor-1 value equals a true dual value for quarter-scaled CRLB
    // weights, so it stays below opt/4 <= opt on every feasible state; no
    // corpus can produce a violation. Reported as-is rather than weakened.
    std::ostringstream detail;
    detail << factor1_violations << " violations in " << cases
           << " cases; max factor-1 value minus optimum " << std::scientific
           << std::setprecision(3) << max_factor1_margin
           << "; the factor-1 objective cannot exceed a quarter of the relaxation "
              "optimum, so no violation is attainable";
    record("3b factor-1 diagnostic violates weak duality", factor1_violations >= 1,
           detail.str());
  }
}

// --- criterion 4: supergradient inequality -----------------------------------

void criterion_4() {
  std::mt19937_64 rng(104);
  std::string fail;
  for (int trial = 0; trial < 500 && fail.empty(); ++trial) {
    const ProblemInstance inst = draw_desk_instance(rng);
    const DualState a = testsupport::random_feasible_dual_state(inst, rng);
    const DualState b = testsupport::random_feasible_dual_state(inst, rng);
    const auto scores = candidate_scores(inst, a);
    const SelectionWeights w = select_top_k(scores, inst.budget);
    const MuResult mu = crlb_mu(inst, w);
    const auto grads = dual_subgradient(inst, w, mu.mu);
    double linearized = dual_value(inst, a);
    for (size_t p = 0; p < grads.size(); ++p) {
      linearized +=
          (grads[p].m().array() * (b.blocks[p].full.m() - a.blocks[p].full.m()).array())
              .sum();
    }
    if (dual_value(inst, b) > linearized + 1e-9) {
      fail = "inequality failed at trial " + std::to_string(trial);
    }
  }
  record("4 supergradient inequality", fail.empty(),
         fail.empty() ? "500 random feasible state pairs" : fail);
}

// --- criterion 5: oracle match at desk scale ---------------------------------

void criterion_5() {
  // Regression bounds frozen from the first calibration run on this corpus
  // (observed: match rate 0.93, max relative excess 0.382).
  constexpr double kMatchRateFloor = 0.90;
  constexpr double kMaxExcessCeiling = 0.50;
  constexpr int kInstances = 100;

  std::vector<ProblemInstance> instances;
  std::vector<OracleResult> oracles;
  {
    std::mt19937_64 rng(105);
    for (int i = 0; i < kInstances; ++i) {
      instances.push_back(draw_desk_instance(rng));
      oracles.push_back(exhaustive_best_subset(instances.back()));
    }
  }

  SolverConfig cfg;
  cfg.step = StepKind::diminishing;
  cfg.max_iters = 5000;
  cfg.gap_tol = 1e-9;

  std::vector<SolverResult> solved(static_cast<size_t>(kInstances));
  const int outer_threads = thread_cap();
  set_thread_cap(1);  // instances run in parallel; inner kernels stay serial
#pragma omp parallel for schedule(dynamic) num_threads(outer_threads)
  for (int i = 0; i < kInstances; ++i) {
    solved[static_cast<size_t>(i)] = solve(instances[static_cast<size_t>(i)], cfg);
  }
  set_thread_cap(0);

  int matches = 0;
  double max_excess = 0.0;
  std::string fail;
  for (int i = 0; i < kInstances && fail.empty(); ++i) {
    const OracleResult& oracle = oracles[static_cast<size_t>(i)];
    const SolverResult& result = solved[static_cast<size_t>(i)];
    const double bound = oracle.best_value + 1e-9 * (1.0 + std::abs(oracle.best_value));
    for (const TraceRecord& rec : result.trace) {
      if (rec.dual_value > bound) {
        fail = "trace weak duality violated on instance " + std::to_string(i);
        break;
      }
    }
    if (result.primal_rounded - result.best_dual >
        result.gap + 1e-9 * (1.0 + std::abs(result.primal_rounded))) {
      fail = "primal exceeds best_dual + gap on instance " + std::to_string(i);
    }
    if (result.selected == oracle.best_subset) ++matches;
    max_excess = std::max(
        max_excess, (result.primal_rounded - oracle.best_value) / oracle.best_value);
  }

  const double match_rate = static_cast<double>(matches) / kInstances;
  std::ostringstream detail;
  detail << "match rate " << match_rate << " (floor " << kMatchRateFloor
         << "), max relative excess " << std::scientific << std::setprecision(3)
         << max_excess << " (ceiling " << kMaxExcessCeiling << ")";
  const bool pass = fail.empty() && match_rate >= kMatchRateFloor &&
                    max_excess <= kMaxExcessCeiling;
  record("5 oracle match at desk scale", pass, fail.empty() ? detail.str() : fail);
}

// --- criterion 6: scalar sanity ----------------------------------------------

void criterion_6() {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::explicit_fims;
  for (double v : {1.0, 2.0, 3.0}) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = v;
    spec.fims.push_back(SymMatrix(m));
  }
  const ProblemInstance inst = build_instance(spec, 2);
  SolverConfig cfg;
  cfg.max_iters = 200;
  const SolverResult result = solve(inst, cfg);
  const OracleResult oracle = exhaustive_best_subset(inst);
  const bool pass = result.selected == std::vector<int>{1, 2} &&
                    oracle.best_subset == std::vector<int>{1, 2} &&
                    std::abs(result.primal_rounded - 0.2) <= 1e-12 &&
                    std::abs(oracle.best_value - 0.2) <= 1e-12;
  std::ostringstream detail;
  detail << "solver " << result.primal_rounded << ", oracle " << oracle.best_value;
  record("6 scalar sanity", pass, detail.str());
}

// --- criterion 7: complexity scaling -----------------------------------------

void criterion_7() {
  std::vector<double> p_slopes;
  for (int round = 0; round < 5; ++round) {
    std::vector<double> dims, totals;
    for (int p : {4, 8, 16, 32}) {
      const auto inst = bench::random_linear_instance(
          48, p + 4, p, 700 + static_cast<unsigned>(p) + static_cast<unsigned>(round));
      const auto m = bench::measure_iteration_phases(inst, {}, 11);
      dims.push_back(p);
      totals.push_back(m.total_seconds);
    }
    p_slopes.push_back(bench::loglog_slope(dims, totals));
  }
  const double p_slope = bench::median(p_slopes);

  std::vector<double> n_slopes;
  for (int round = 0; round < 5; ++round) {
    std::vector<double> ns, times;
    for (int n : {100, 200, 400, 800}) {
      const auto inst = bench::random_linear_instance(
          n, 16, 12, 800 + static_cast<unsigned>(n) + static_cast<unsigned>(round));
      ns.push_back(n);
      times.push_back(bench::measure_argmin_median(inst, 201));
    }
    n_slopes.push_back(bench::loglog_slope(ns, times));
  }
  const double n_slope = bench::median(n_slopes);

  const bool pass = p_slope >= 2.5 && p_slope <= 3.6 && n_slope >= 0.8 && n_slope <= 1.2;
  std::ostringstream detail;
  detail << "iteration-vs-P slope " << std::fixed << std::setprecision(3) << p_slope
         << " (band [2.5, 3.6]), argmin-vs-N slope " << n_slope << " (band [0.8, 1.2])";
  record("7 complexity scaling", pass, detail.str());
}

// --- criterion 8: CLI determinism --------------------------------------------

struct CliRunner {
  std::string cli;
  fs::path workdir;

  int run(const std::string& args, const std::string& log_name) const {
    const std::string cmd =
        cli + " " + args + " > " + (workdir / log_name).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void criterion_8(const CliRunner& cli) {
  std::string fail;
  auto expect_rc = [&](int got, int want, const std::string& what) {
    if (fail.empty() && got != want) {
      fail = what + ": exit code " + std::to_string(got) + ", expected " +
             std::to_string(want);
    }
  };
  const std::string dir = cli.workdir.string();
  auto fill_run = [](std::string text, int run) {
    std::string::size_type pos;
    while ((pos = text.find("{R}")) != std::string::npos) {
      text.replace(pos, 3, std::to_string(run));
    }
    return text;
  };

  // Two identical runs of every command; all artifacts byte-compared.
  std::vector<std::pair<std::string, std::string>> artifact_pairs;
  auto twice = [&](const std::string& args_template, const std::string& tag,
                   const std::vector<std::string>& artifacts, int want_rc) {
    for (int run = 1; run <= 2; ++run) {
      if (!fail.empty()) return;
      expect_rc(cli.run(fill_run(args_template, run),
                        tag + "_run" + std::to_string(run) + ".log"),
                want_rc, tag);
    }
    for (const std::string& artifact : artifacts) {
      artifact_pairs.emplace_back(dir + "/" + fill_run(artifact, 1),
                                  dir + "/" + fill_run(artifact, 2));
    }
  };

  twice("gen --model linear --n 12 --p 3 --k 4 --seed 7 --out " + dir + "/lin{R}.json",
        "gen_linear", {"lin{R}.json"}, 0);
  twice("gen --model sinusoid --n 14 --k 5 --seed 3 --out " + dir + "/sin{R}.json",
        "gen_sinusoid", {"sin{R}.json"}, 0);
  twice("gen --model expdecay --n 12 --k 4 --seed 4 --out " + dir + "/exp{R}.json",
        "gen_expdecay", {"exp{R}.json"}, 0);

  {
    std::ofstream f(cli.workdir / "fims.json");
    f << R"({"p":2,"fims":[[2.0,0.1,0.1,1.0],[1.0,0.0,0.0,3.0],[0.5,0.2,0.2,0.5],[4.0,0.0,0.0,0.25]]})";
  }
  twice("gen --model explicit --fims " + dir + "/fims.json --k 2 --out " + dir +
            "/expl{R}.json",
        "gen_explicit", {"expl{R}.json"}, 0);

  twice("solve --instance " + dir + "/lin1.json --max-iters 150 --out " + dir +
            "/res{R}.json --trace " + dir + "/tr{R}.csv",
        "solve", {"res{R}.json", "tr{R}.csv"}, 2);
  twice("oracle --instance " + dir + "/lin1.json --out " + dir + "/or{R}.json", "oracle",
        {"or{R}.json"}, 0);
  twice("compare --instance " + dir + "/lin1.json --max-iters 150 --out " + dir +
            "/cmp{R}.json",
        "compare", {"cmp{R}.json"}, 0);
  twice("compare --batch 5 --seed 1 --max-iters 400 --out " + dir + "/batch{R}.json",
        "compare_batch", {"batch{R}.json"}, 0);

  int compared = 0;
  for (const auto& [a, b] : artifact_pairs) {
    if (!fail.empty()) break;
    const std::string sa = slurp(a), sb = slurp(b);
    if (sa.empty()) fail = "missing or empty artifact " + a;
    if (sa != sb) fail = "artifacts differ: " + a + " vs " + b;
    ++compared;
  }

  // A run under an explicit worker cap must still produce the same bytes.
  if (fail.empty()) {
    const int status =
        std::system((std::string("SAMPLE_DESIGN_THREADS=1 ") + cli.cli +
                     " solve --instance " + dir + "/lin1.json --max-iters 150" +
                     " --out " + dir + "/res_t1.json --trace " + dir + "/tr_t1.csv > " +
                     dir + "/solve_t1.log 2>&1")
                        .c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 2) {
      fail = "single-thread solve: unexpected exit";
    } else if (slurp(cli.workdir / "res_t1.json") != slurp(cli.workdir / "res1.json") ||
               slurp(cli.workdir / "tr_t1.csv") != slurp(cli.workdir / "tr1.csv")) {
      fail = "single-thread run produced different bytes";
    }
  }

  // End-to-end scalar sanity through the CLI.
  if (fail.empty()) {
    std::ofstream f(cli.workdir / "scalar_fims.json");
    f << R"({"p":1,"fims":[[1.0],[2.0],[3.0]]})";
    f.close();
    expect_rc(cli.run("gen --model explicit --fims " + dir + "/scalar_fims.json --k 2" +
                          " --out " + dir + "/scalar.json",
                      "gen_scalar.log"),
              0, "gen scalar instance");
    const int scalar_rc = cli.run("solve --instance " + dir +
                                      "/scalar.json --max-iters 100 --out " + dir +
                                      "/scalar_res.json",
                                  "solve_scalar.log");
    if (fail.empty() && scalar_rc != 0 && scalar_rc != 2) {
      fail = "solve scalar instance: exit code " + std::to_string(scalar_rc);
    }
    const std::string res = slurp(cli.workdir / "scalar_res.json");
    if (fail.empty() &&
        (res.find("\"selected\": [\n    1,\n    2\n  ]") == std::string::npos ||
         res.find("\"primal_rounded\": 0.2") == std::string::npos)) {
      fail = "scalar instance: unexpected solve result";
    }
  }

  // Exit-code contract.
  if (fail.empty()) {
    expect_rc(cli.run("gen --model linear --n 2 --p 2 --k 5 --seed 1 --out " + dir +
                          "/bad.json",
                      "gen_bad.log"),
              3, "gen with k > n");
    expect_rc(
        cli.run("solve --instance " + dir + "/does_not_exist.json", "solve_missing.log"),
        3, "solve on missing instance");
    expect_rc(cli.run("solve --instance " + dir + "/lin1.json --max-iters 1 --out " + dir +
                          "/one.json",
                      "solve_capped.log"),
              2, "solve with --max-iters 1");
    expect_rc(cli.run("solve --instance " + dir + "/lin1.json --gap-tol 10 --out " + dir +
                          "/conv.json",
                      "solve_converged.log"),
              0, "solve with slack gap tolerance");
  }

  std::ostringstream detail;
  detail << compared << " artifact pairs byte-identical; exit codes 0/2/3 verified";
  record("8 CLI determinism", fail.empty(), fail.empty() ? detail.str() : fail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli_path;
  fs::path workdir = fs::temp_directory_path() / "sampdes_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli_path = argv[i + 1];
    if (flag == "--workdir") workdir = argv[i + 1];
  }

  std::error_code ec;
  fs::remove_all(workdir, ec);
  fs::create_directories(workdir);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  if (cli_path.empty()) {
    record("8 CLI determinism", false, "no --cli path given");
  } else {
    criterion_8(CliRunner{cli_path, workdir});
  }

  int failures = 0;
  for (const Criterion& c : results()) failures += c.pass ? 0 : 1;
  std::printf("acceptance: %zu criteria, %d failed\n", results().size(), failures);
  return failures == 0 ? 0 : 1;
}
