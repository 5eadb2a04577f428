// The OpenMP kernels must be bitwise-identical to their serial references
// regardless of the worker count.

#include "sampdes/oracle.hpp"
#include "sampdes/parallel.hpp"
#include "sampdes/solver.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace sampdes;
using testsupport::random_linear_instance;

namespace {

struct ThreadCapGuard {
  explicit ThreadCapGuard(int n) { set_thread_cap(n); }
  ~ThreadCapGuard() { set_thread_cap(0); }
};

}  // namespace

TEST_CASE("candidate_scores matches the serial reference bitwise") {
  std::mt19937_64 rng(50);
  const ProblemInstance inst = random_linear_instance(257, 10, 5, 51);
  const DualState state = testsupport::random_feasible_dual_state(inst, rng);
  const auto serial = candidate_scores_serial(inst, state);
  for (int threads : {1, 2, 4}) {
    ThreadCapGuard guard(threads);
    const auto parallel = candidate_scores(inst, state);
    REQUIRE(parallel.size() == serial.size());
    for (size_t n = 0; n < serial.size(); ++n) CHECK(parallel[n] == serial[n]);
  }
}

TEST_CASE("ascent_step matches the serial reference bitwise") {
  std::mt19937_64 rng(52);
  const ProblemInstance inst = random_linear_instance(20, 8, 5, 53);
  const DualState state = testsupport::random_feasible_dual_state(inst, rng);
  const auto scores = candidate_scores_serial(inst, state);
  const SelectionWeights w = select_top_k(scores, inst.budget);
  const MuResult mu = crlb_mu(inst, w);
  const auto grads = dual_subgradient(inst, w, mu.mu);

  const AscentResult serial = ascent_step_serial(inst, state, grads, 0.3);
  for (int threads : {1, 2, 4}) {
    ThreadCapGuard guard(threads);
    const AscentResult parallel = ascent_step(inst, state, grads, 0.3);
    REQUIRE(parallel.state.blocks.size() == serial.state.blocks.size());
    for (size_t p = 0; p < serial.state.blocks.size(); ++p) {
      CHECK(parallel.state.blocks[p].full == serial.state.blocks[p].full);
    }
    CHECK(parallel.max_projection_residual == serial.max_projection_residual);
  }
}

TEST_CASE("exhaustive oracle matches the serial reference exactly") {
  for (unsigned seed : {54u, 55u}) {
    const ProblemInstance inst = random_linear_instance(12, 4, 3, seed);
    const OracleResult serial = exhaustive_best_subset_serial(inst);
    for (int threads : {2, 4, 7}) {
      ThreadCapGuard guard(threads);
      const OracleResult parallel = exhaustive_best_subset(inst);
      CHECK(parallel.best_subset == serial.best_subset);
      CHECK(parallel.best_value == serial.best_value);
      CHECK(parallel.evaluated == serial.evaluated);
      CHECK(parallel.singular_skipped == serial.singular_skipped);
      CHECK(parallel.ties == serial.ties);
    }
  }
}

TEST_CASE("oracle with exact ties is scheduling-independent") {
  // Identical candidates create exact value ties across chunk boundaries.
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::explicit_fims;
  for (int i = 0; i < 10; ++i) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    spec.fims.push_back(SymMatrix(m));
  }
  const ProblemInstance inst = build_instance(spec, 3);
  const OracleResult serial = exhaustive_best_subset_serial(inst);
  CHECK(serial.best_subset == std::vector<int>{0, 1, 2});
  CHECK(serial.ties.size() == serial.evaluated);  // all 120 subsets tie
  for (int threads : {2, 4}) {
    ThreadCapGuard guard(threads);
    const OracleResult parallel = exhaustive_best_subset(inst);
    CHECK(parallel.best_subset == serial.best_subset);
    CHECK(parallel.ties == serial.ties);
  }
}
