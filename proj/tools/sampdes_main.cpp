// Command-line front end: generate instances, solve, run the exhaustive
// oracle, and compare solver output against it.
//
// Exit codes: 0 success/converged, 2 iteration cap reached, 3 invalid input,
// 4 internal error.

#include "sampdes/io.hpp"
#include "sampdes/oracle.hpp"
#include "sampdes/parallel.hpp"
#include "sampdes/problem.hpp"
#include "sampdes/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitIterationCap = 2;
constexpr int kExitInvalidInput = 3;
constexpr int kExitInternal = 4;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunManifest {
  std::string command;
  std::string instance_path;
  ordered_json config;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Every artifact named here must exist; missing files are an internal error.
void emit_manifest(const RunManifest& m) {
  for (const std::string& path : m.artifacts) {
    if (!std::filesystem::exists(path)) {
      throw std::runtime_error("manifest: artifact missing: " + path);
    }
  }
  ordered_json j;
  j["command"] = m.command;
  if (!m.instance_path.empty()) j["instance"] = m.instance_path;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["timestamp_utc"] = utc_now();
  j["artifacts"] = m.artifacts;
  std::cout << "manifest " << j.dump() << "\n";
}

struct SolverFlags {
  double alpha0 = 0.0;
  std::string step = "diminishing";
  int max_iters = 1000;
  double gap_tol = 1e-6;
  std::string singular_policy = "ridge";

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha0", alpha0, "Step-size base (<= 0 picks the scale-aware default)");
    cmd->add_option("--step", step, "Step schedule")
        ->check(CLI::IsMember({"constant", "diminishing"}));
    cmd->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--gap-tol", gap_tol, "Relative duality-gap stopping tolerance");
    cmd->add_option("--singular-policy", singular_policy,
                    "Handling of singular information sums")
        ->check(CLI::IsMember({"ridge", "cap"}));
  }

  sampdes::SolverConfig to_config() const {
    sampdes::SolverConfig cfg;
    cfg.alpha0 = alpha0;
    cfg.step = step == "constant" ? sampdes::StepKind::constant
                                  : sampdes::StepKind::diminishing;
    cfg.max_iters = max_iters;
    cfg.gap_tol = gap_tol;
    cfg.singular_policy = singular_policy == "cap" ? sampdes::SingularPolicy::cap
                                                   : sampdes::SingularPolicy::ridge;
    return cfg;
  }

  ordered_json snapshot() const {
    ordered_json j;
    j["alpha0"] = alpha0;
    j["step"] = step;
    j["max_iters"] = max_iters;
    j["gap_tol"] = gap_tol;
    j["singular_policy"] = singular_policy;
    return j;
  }
};

sampdes::ProblemInstance load_validated(const std::string& path) {
  sampdes::ProblemInstance instance;
  try {
    instance = sampdes::load_instance(path);
  } catch (const std::exception& e) {
    throw InvalidInput(e.what());
  }
  const sampdes::ValidationReport report = sampdes::validate(instance);
  if (!report.ok) {
    throw InvalidInput("instance " + path + " invalid: " + report.joined());
  }
  return instance;
}

// --- gen --------------------------------------------------------------------

struct GenFlags {
  std::string model = "linear";
  int n = 0;
  int k = 0;
  int p = 0;
  std::uint64_t seed = 0;
  double noise_var = 1.0;
  std::string fims_path;
  std::string out;
};

sampdes::ProblemInstance generate_instance(const GenFlags& flags) {
  std::mt19937_64 rng(flags.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  sampdes::ModelSpec spec;
  spec.noise_var = flags.noise_var;

  if (flags.model == "linear") {
    if (flags.n < 1 || flags.p < 1) throw InvalidInput("gen: linear model needs --n and --p");
    spec.kind = sampdes::ModelSpec::Kind::linear_gaussian;
    for (int i = 0; i < flags.n; ++i) {
      Eigen::VectorXd x(flags.p);
      for (int j = 0; j < flags.p; ++j) x(j) = normal(rng);
      spec.designs.push_back(std::move(x));
    }
  } else if (flags.model == "sinusoid" || flags.model == "expdecay") {
    if (flags.n < 1) throw InvalidInput("gen: --n required");
    const bool sinusoid = flags.model == "sinusoid";
    const int model_p = sinusoid ? 3 : 2;
    if (flags.p != 0 && flags.p != model_p) {
      throw InvalidInput("gen: --p must be " + std::to_string(model_p) + " for " + flags.model);
    }
    spec.kind = sinusoid ? sampdes::ModelSpec::Kind::sinusoid
                         : sampdes::ModelSpec::Kind::exponential_decay;
    spec.theta0 = sinusoid ? std::vector<double>{1.0, 0.05, 0.25 * std::numbers::pi}
                           : std::vector<double>{1.0, 0.1};
    for (int i = 0; i < flags.n; ++i) spec.grid.push_back(static_cast<double>(i));
  } else if (flags.model == "explicit") {
    if (flags.fims_path.empty()) throw InvalidInput("gen: explicit model needs --fims FILE");
    std::ifstream in(flags.fims_path);
    if (!in) throw InvalidInput("gen: cannot open " + flags.fims_path);
    ordered_json j;
    try {
      j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("gen: parse error in " + flags.fims_path + ": " + e.what());
    }
    if (!j.contains("p") || !j.contains("fims")) {
      throw InvalidInput("gen: " + flags.fims_path + " must contain \"p\" and \"fims\"");
    }
    const int p = j["p"].get<int>();
    spec.kind = sampdes::ModelSpec::Kind::explicit_fims;
    for (const auto& entry : j["fims"]) {
      const std::vector<double> values = entry.get<std::vector<double>>();
      spec.fims.push_back(sampdes::SymMatrix::from_row_major(p, values));
    }
    if (flags.n != 0 && flags.n != static_cast<int>(spec.fims.size())) {
      throw InvalidInput("gen: --n disagrees with the matrices in " + flags.fims_path);
    }
  } else {
    throw InvalidInput("gen: unknown model " + flags.model);
  }

  sampdes::ProblemInstance instance;
  try {
    instance = sampdes::build_instance(spec, flags.k);
  } catch (const std::exception& e) {
    throw InvalidInput(e.what());
  }
  ordered_json meta;
  meta["model"] = flags.model;
  meta["seed"] = flags.seed;
  meta["noise_var"] = flags.noise_var;
  instance.meta = meta.dump();
  return instance;
}

int cmd_gen(const GenFlags& flags) {
  const sampdes::ProblemInstance instance = generate_instance(flags);
  sampdes::save_instance(instance, flags.out);

  RunManifest manifest;
  manifest.command = "gen";
  manifest.seed = flags.seed;
  manifest.config["model"] = flags.model;
  manifest.config["n"] = instance.num_candidates;
  manifest.config["k"] = instance.budget;
  manifest.config["p"] = instance.param_dim;
  manifest.config["noise_var"] = flags.noise_var;
  manifest.artifacts.push_back(flags.out);
  emit_manifest(manifest);
  return kExitOk;
}

// --- solve ------------------------------------------------------------------

int cmd_solve(const std::string& instance_path, const std::string& out,
              const std::string& trace, const SolverFlags& flags) {
  const sampdes::ProblemInstance instance = load_validated(instance_path);
  const sampdes::SolverResult result = sampdes::solve(instance, flags.to_config());

  if (!out.empty()) sampdes::write_result_json(result, out);
  if (!trace.empty()) sampdes::write_trace_csv(result, trace);

  std::cout << "solve: selected=[";
  for (size_t i = 0; i < result.selected.size(); ++i) {
    std::cout << (i ? "," : "") << result.selected[i];
  }
  std::cout << "] primal=" << sampdes::format_double(result.primal_rounded)
            << " best_dual=" << sampdes::format_double(result.best_dual)
            << " gap=" << sampdes::format_double(result.gap)
            << " iters=" << result.iterations
            << (result.converged ? " converged" : " iteration-capped") << "\n";

  RunManifest manifest;
  manifest.command = "solve";
  manifest.instance_path = instance_path;
  manifest.config = flags.snapshot();
  if (!out.empty()) manifest.artifacts.push_back(out);
  if (!trace.empty()) manifest.artifacts.push_back(trace);
  emit_manifest(manifest);
  return result.converged ? kExitOk : kExitIterationCap;
}

// --- oracle -----------------------------------------------------------------

int cmd_oracle(const std::string& instance_path, const std::string& out,
               std::uint64_t cap) {
  const sampdes::ProblemInstance instance = load_validated(instance_path);
  sampdes::OracleConfig cfg;
  cfg.cap = cap;
  const sampdes::OracleResult result = sampdes::exhaustive_best_subset(instance, cfg);

  std::cout << "oracle: best_subset=[";
  for (size_t i = 0; i < result.best_subset.size(); ++i) {
    std::cout << (i ? "," : "") << result.best_subset[i];
  }
  std::cout << "] best_value=" << sampdes::format_double(result.best_value)
            << " evaluated=" << result.evaluated
            << " singular_skipped=" << result.singular_skipped
            << " ties=" << result.ties.size() << "\n";

  RunManifest manifest;
  manifest.command = "oracle";
  manifest.instance_path = instance_path;
  manifest.config["oracle_cap"] = cap;
  if (!out.empty()) {
    sampdes::write_oracle_json(result, out);
    manifest.artifacts.push_back(out);
  }
  emit_manifest(manifest);
  return kExitOk;
}

// --- compare ----------------------------------------------------------------

struct CompareOutcome {
  ordered_json report;
  bool weak_duality_ok = true;
};

CompareOutcome compare_one(const sampdes::ProblemInstance& instance, const SolverFlags& flags,
                           std::uint64_t cap) {
  sampdes::OracleConfig oracle_cfg;
  oracle_cfg.cap = cap;
  const sampdes::OracleResult oracle = sampdes::exhaustive_best_subset(instance, oracle_cfg);
  const sampdes::SolverResult solved = sampdes::solve(instance, flags.to_config());

  const bool match = solved.selected == oracle.best_subset;
  const double excess =
      (solved.primal_rounded - oracle.best_value) / std::abs(oracle.best_value);
  // Weak duality: every dual value along the trace lower-bounds the optimum.
  double max_dual = solved.best_dual;
  const bool duality_ok =
      max_dual <= oracle.best_value + 1e-9 * (1.0 + std::abs(oracle.best_value));

  CompareOutcome out;
  out.weak_duality_ok = duality_ok;
  out.report["solver_value"] = solved.primal_rounded;
  out.report["oracle_value"] = oracle.best_value;
  out.report["relative_excess"] = excess;
  out.report["match"] = match;
  out.report["solver_selected"] = solved.selected;
  out.report["oracle_subset"] = oracle.best_subset;
  out.report["best_dual"] = solved.best_dual;
  out.report["weak_duality_ok"] = duality_ok;
  out.report["converged"] = solved.converged;
  out.report["iterations"] = solved.iterations;
  return out;
}

int cmd_compare(const std::string& instance_path, const std::string& out,
                const SolverFlags& flags, std::uint64_t cap, int batch,
                std::uint64_t seed, int n, int k, int p) {
  ordered_json report;
  bool all_duality_ok = true;

  if (batch <= 0) {
    const sampdes::ProblemInstance instance = load_validated(instance_path);
    CompareOutcome outcome = compare_one(instance, flags, cap);
    all_duality_ok = outcome.weak_duality_ok;
    report = std::move(outcome.report);
    std::cout << "compare: solver=" << sampdes::format_double(report["solver_value"].get<double>())
              << " oracle=" << sampdes::format_double(report["oracle_value"].get<double>())
              << " excess=" << sampdes::format_double(report["relative_excess"].get<double>())
              << " match=" << (report["match"].get<bool>() ? "yes" : "no") << "\n"
              << "compare: weak duality dual=" << sampdes::format_double(report["best_dual"].get<double>())
              << " <= oracle=" << sampdes::format_double(report["oracle_value"].get<double>()) << " : "
              << (all_duality_ok ? "ok" : "VIOLATED") << "\n";
  } else {
    std::mt19937_64 rng(seed);
    int matches = 0;
    double max_excess = 0.0;
    ordered_json rows = ordered_json::array();
    for (int b = 0; b < batch; ++b) {
      // Desk-scale draw; k >= p keeps generic subsets invertible.
      const int pi = p > 0 ? p : 1 + static_cast<int>(rng() % 3);
      int ki = k > 0 ? k : std::max(2, pi) + static_cast<int>(rng() % 2);
      const int ni = n > 0 ? n : std::max(ki + 2, 5) + static_cast<int>(rng() % 4);
      if (ki > ni) throw InvalidInput("compare: --k exceeds --n in batch draw");
      std::normal_distribution<double> normal(0.0, 1.0);
      sampdes::ModelSpec spec;
      spec.kind = sampdes::ModelSpec::Kind::linear_gaussian;
      for (int i = 0; i < ni; ++i) {
        Eigen::VectorXd x(pi);
        for (int j = 0; j < pi; ++j) x(j) = normal(rng);
        spec.designs.push_back(std::move(x));
      }
      const sampdes::ProblemInstance instance = sampdes::build_instance(spec, ki);
      CompareOutcome outcome = compare_one(instance, flags, cap);
      all_duality_ok = all_duality_ok && outcome.weak_duality_ok;
      if (outcome.report["match"].get<bool>()) ++matches;
      max_excess = std::max(max_excess, outcome.report["relative_excess"].get<double>());
      outcome.report["n"] = ni;
      outcome.report["k"] = ki;
      outcome.report["p"] = pi;
      rows.push_back(std::move(outcome.report));
    }
    const double match_rate = static_cast<double>(matches) / batch;
    report["batch"] = batch;
    report["seed"] = seed;
    report["match_rate"] = match_rate;
    report["max_relative_excess"] = max_excess;
    report["weak_duality_ok"] = all_duality_ok;
    report["instances"] = std::move(rows);
    std::cout << "compare: batch=" << batch << " match_rate="
              << sampdes::format_double(match_rate)
              << " max_excess=" << sampdes::format_double(max_excess) << " weak_duality="
              << (all_duality_ok ? "ok" : "VIOLATED") << "\n";
  }

  RunManifest manifest;
  manifest.command = "compare";
  manifest.instance_path = instance_path;
  manifest.config = flags.snapshot();
  manifest.config["oracle_cap"] = cap;
  manifest.config["batch"] = batch;
  manifest.seed = seed;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("compare: cannot write " + out);
    f << report.dump(2) << '\n';
    manifest.artifacts.push_back(out);
  }
  emit_manifest(manifest);

  if (!all_duality_ok) {
    throw std::runtime_error("compare: weak duality violated; solver is inconsistent");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal sampling-scheme designer: pick K of N candidate samples "
               "by minimizing weighted CRLBs"};
  app.require_subcommand(1);

  GenFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
  gen_cmd->add_option("--model", gen.model, "linear | sinusoid | expdecay | explicit");
  gen_cmd->add_option("--n", gen.n, "Candidate count");
  gen_cmd->add_option("--k", gen.k, "Selection budget");
  gen_cmd->add_option("--p", gen.p, "Parameter dimension (linear model)");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--noise-var", gen.noise_var, "Observation noise variance");
  gen_cmd->add_option("--fims", gen.fims_path, "Matrix file for --model explicit");
  gen_cmd->add_option("--out", gen.out, "Instance output path")->required();

  std::string instance_path, out_path, trace_path;
  SolverFlags solve_flags;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Run the dual subgradient solver");
  solve_cmd->add_option("--instance", instance_path, "Instance file")->required();
  solve_cmd->add_option("--out", out_path, "Result JSON path");
  solve_cmd->add_option("--trace", trace_path, "Per-iteration trace CSV path");
  solve_flags.attach(solve_cmd);

  std::string oracle_instance, oracle_out;
  std::uint64_t oracle_cap = 2'000'000;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Exhaustive best subset");
  oracle_cmd->add_option("--instance", oracle_instance, "Instance file")->required();
  oracle_cmd->add_option("--out", oracle_out, "Report JSON path");
  oracle_cmd->add_option("--oracle-cap", oracle_cap, "Max subsets to enumerate");

  std::string cmp_instance, cmp_out;
  SolverFlags cmp_flags;
  std::uint64_t cmp_cap = 2'000'000, cmp_seed = 0;
  int cmp_batch = 0, cmp_n = 0, cmp_k = 0, cmp_p = 0;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Solver vs exhaustive oracle");
  cmp_cmd->add_option("--instance", cmp_instance, "Instance file (omit with --batch)");
  cmp_cmd->add_option("--out", cmp_out, "Report JSON path");
  cmp_cmd->add_option("--oracle-cap", cmp_cap, "Max subsets to enumerate");
  cmp_cmd->add_option("--batch", cmp_batch, "Generate and compare this many random instances");
  cmp_cmd->add_option("--seed", cmp_seed, "Batch RNG seed");
  cmp_cmd->add_option("--n", cmp_n, "Fix batch candidate count");
  cmp_cmd->add_option("--k", cmp_k, "Fix batch budget");
  cmp_cmd->add_option("--p", cmp_p, "Fix batch parameter dimension");
  cmp_flags.attach(cmp_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*solve_cmd) return cmd_solve(instance_path, out_path, trace_path, solve_flags);
    if (*oracle_cmd) return cmd_oracle(oracle_instance, oracle_out, oracle_cap);
    if (*cmp_cmd) {
      if (cmp_batch <= 0 && cmp_instance.empty()) {
        throw InvalidInput("compare: need --instance or --batch");
      }
      return cmd_compare(cmp_instance, cmp_out, cmp_flags, cmp_cap, cmp_batch, cmp_seed,
                         cmp_n, cmp_k, cmp_p);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
