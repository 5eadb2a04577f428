#pragma once

#include "sampdes/problem.hpp"
#include "sampdes/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sampdes {

struct OracleConfig {
  std::uint64_t cap = 2'000'000;  // refuse to enumerate more subsets than this
  double tie_tol = 1e-9;          // relative; ties are values within tie_tol of the best
};

struct OracleResult {
  std::vector<int> best_subset;  // sorted, exactly budget indices
  double best_value = 0.0;
  std::uint64_t evaluated = 0;   // == C(N, K)
  std::uint64_t singular_skipped = 0;
  /// All subsets within tolerance of best_value (the best one included),
  /// in lexicographic order.
  std::vector<std::vector<int>> ties;
};

/// C(n, k), saturating at `cap + 1` to keep the cap check overflow-free.
std::uint64_t binomial_capped(int n, int k, std::uint64_t cap);

/// Minimizes the weighted CRLB objective over every size-K subset. Subsets
/// with a singular information sum are skipped and counted. Exact value ties
/// resolve to the lexicographically smallest subset. Enumeration is
/// partitioned across workers; results match the serial reference exactly.
/// Throws std::runtime_error when C(N,K) exceeds the cap or every subset is
/// singular.
OracleResult exhaustive_best_subset(const ProblemInstance& instance,
                                    const OracleConfig& cfg = {});
/// Serial reference implementation kept for testing.
OracleResult exhaustive_best_subset_serial(const ProblemInstance& instance,
                                           const OracleConfig& cfg = {});

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

/// Checks w in the weight polytope and every constraint block
/// [[A(w), e_p], [e_p^T, mu_p]] PSD up to the eigenvalue tolerance.
FeasibilityReport check_primal_feasibility(const ProblemInstance& instance,
                                           const SelectionWeights& w,
                                           const std::vector<double>& mu,
                                           double eig_tol = 1e-9);

struct DualityReport {
  bool ok = true;
  double dual = 0.0;         // dual objective at the state
  double primal_bound = 0.0; // oracle best value
  double slack = 0.0;        // primal_bound - dual
};

/// Asserts the dual value lower-bounds the exhaustive optimum within
/// 1e-9 * (1 + |optimum|).
DualityReport check_weak_duality(const ProblemInstance& instance, const DualState& state,
                                 const OracleResult& oracle);

}  // namespace sampdes
