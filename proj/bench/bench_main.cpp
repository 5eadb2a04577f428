// Compares the OpenMP kernels against their serial references and prints the
// per-iteration scaling tables.

#include "phase_timing.hpp"

#include "sampdes/oracle.hpp"
#include "sampdes/parallel.hpp"
#include "sampdes/solver.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

using sampdes::bench::loglog_slope;
using sampdes::bench::measure_iteration_phases;
using sampdes::bench::median;
using sampdes::bench::random_linear_instance;

double time_median(int reps, const std::function<void()>& fn) {
  using clock = std::chrono::steady_clock;
  std::vector<double> times;
  times.reserve(static_cast<size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  return median(times);
}

void kernel_comparison() {
  std::printf("== serial vs parallel kernels (threads=%d) ==\n", sampdes::thread_cap());
  std::printf("%-28s %12s %12s %8s %s\n", "kernel", "serial [ms]", "parallel[ms]", "speedup",
              "same result");

  {
    const auto inst = random_linear_instance(20000, 50, 8, 11);
    const auto state = sampdes::initial_dual_state(inst);
    std::vector<double> serial_out, parallel_out;
    const double ts = time_median(15, [&] { serial_out = candidate_scores_serial(inst, state); });
    const double tp = time_median(15, [&] { parallel_out = candidate_scores(inst, state); });
    std::printf("%-28s %12.3f %12.3f %8.2f %s\n", "candidate_scores", ts * 1e3, tp * 1e3,
                ts / tp, serial_out == parallel_out ? "yes" : "NO");
  }
  {
    const auto inst = random_linear_instance(60, 40, 24, 12);
    const auto state = sampdes::initial_dual_state(inst);
    const auto scores = candidate_scores(inst, state);
    const auto w = sampdes::select_top_k(scores, inst.budget);
    const auto mu = sampdes::crlb_mu(inst, w);
    const auto grads = sampdes::dual_subgradient(inst, w, mu.mu);
    sampdes::AscentResult rs, rp;
    const double ts =
        time_median(7, [&] { rs = sampdes::ascent_step_serial(inst, state, grads, 0.05); });
    const double tp =
        time_median(7, [&] { rp = sampdes::ascent_step(inst, state, grads, 0.05); });
    bool same = true;
    for (size_t p = 0; p < rs.state.blocks.size(); ++p) {
      same = same && rs.state.blocks[p].full == rp.state.blocks[p].full;
    }
    std::printf("%-28s %12.3f %12.3f %8.2f %s\n", "ascent_step", ts * 1e3, tp * 1e3, ts / tp,
                same ? "yes" : "NO");
  }
  {
    const auto inst = random_linear_instance(22, 6, 3, 13);
    sampdes::OracleResult rs, rp;
    const double ts =
        time_median(3, [&] { rs = sampdes::exhaustive_best_subset_serial(inst); });
    const double tp = time_median(3, [&] { rp = sampdes::exhaustive_best_subset(inst); });
    const bool same = rs.best_subset == rp.best_subset && rs.best_value == rp.best_value &&
                      rs.ties == rp.ties && rs.singular_skipped == rp.singular_skipped;
    std::printf("%-28s %12.3f %12.3f %8.2f %s\n", "exhaustive_best_subset", ts * 1e3, tp * 1e3,
                ts / tp, same ? "yes" : "NO");
  }
}

void scaling_tables() {
  std::printf("\n== per-iteration scaling, parameter dimension (N=48) ==\n");
  std::printf("%6s %14s %14s %14s %14s\n", "P", "argmin [ms]", "mu [ms]", "project [ms]",
              "total [ms]");
  std::vector<double> dims, totals;
  for (int p : {4, 8, 16, 32}) {
    const auto inst = random_linear_instance(48, p + 4, p, 100 + static_cast<unsigned>(p));
    const auto m = measure_iteration_phases(inst, {}, 9);
    dims.push_back(p);
    totals.push_back(m.total_seconds);
    std::printf("%6d %14.4f %14.4f %14.4f %14.4f\n", p, m.argmin_seconds * 1e3,
                m.mu_seconds * 1e3, m.projection_seconds * 1e3, m.total_seconds * 1e3);
  }
  std::printf("log-log slope of total vs P: %.3f (cubic projection dominates)\n",
              loglog_slope(dims, totals));

  std::printf("\n== argmin-step scaling, candidate count (P=12) ==\n");
  std::printf("%6s %14s\n", "N", "argmin [us]");
  std::vector<double> ns, argmins;
  for (int n : {100, 200, 400, 800}) {
    const auto inst = random_linear_instance(n, 16, 12, 200 + static_cast<unsigned>(n));
    const double t = sampdes::bench::measure_argmin_median(inst, 51);
    ns.push_back(n);
    argmins.push_back(t);
    std::printf("%6d %14.2f\n", n, t * 1e6);
  }
  std::printf("log-log slope of argmin vs N: %.3f (linear scoring)\n",
              loglog_slope(ns, argmins));
}

}  // namespace

int main(int argc, char** argv) {
  bool run_kernels = true, run_scaling = true;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--kernels-only") run_scaling = false;
    if (arg == "--scaling-only") run_kernels = false;
  }
  if (run_kernels) kernel_comparison();
  if (run_scaling) scaling_tables();
  return 0;
}
