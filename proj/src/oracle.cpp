#include "sampdes/oracle.hpp"

#include "sampdes/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sampdes {

namespace {

// Advance to the next size-k combination of {0..n-1} in lexicographic order.
bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[static_cast<size_t>(i)] < n - k + i) {
      ++c[static_cast<size_t>(i)];
      for (int j = i + 1; j < k; ++j) {
        c[static_cast<size_t>(j)] = c[static_cast<size_t>(j - 1)] + 1;
      }
      return true;
    }
  }
  return false;
}

// Combination with lexicographic rank r among all size-k subsets of {0..n-1}.
std::vector<int> unrank_combination(std::uint64_t r, int n, int k,
                                    std::uint64_t cap) {
  std::vector<int> c(static_cast<size_t>(k));
  int value = 0;
  for (int slot = 0; slot < k; ++slot) {
    for (;; ++value) {
      const std::uint64_t block = binomial_capped(n - 1 - value, k - 1 - slot, cap);
      if (r < block) break;
      r -= block;
    }
    c[static_cast<size_t>(slot)] = value;
    ++value;
  }
  return c;
}

struct SubsetValue {
  double value = std::numeric_limits<double>::infinity();
  bool singular = false;
};

SubsetValue subset_value(const ProblemInstance& instance, const std::vector<int>& subset) {
  const int p = instance.param_dim;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int n : subset) a += instance.fims[static_cast<size_t>(n)].m();
  const auto diag = inverse_diagonal(SymMatrix(a));
  if (!diag) return {std::numeric_limits<double>::infinity(), true};
  double value = 0.0;
  for (int q = 0; q < p; ++q) {
    value += instance.crlb_weights[static_cast<size_t>(q)] * (*diag)[static_cast<size_t>(q)];
  }
  return {value, false};
}

struct ChunkBest {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t rank = 0;
  std::vector<int> subset;
  std::uint64_t singular = 0;
};

ChunkBest scan_chunk(const ProblemInstance& instance, std::uint64_t begin, std::uint64_t end,
                     std::uint64_t cap) {
  ChunkBest best;
  if (begin >= end) return best;
  std::vector<int> subset =
      unrank_combination(begin, instance.num_candidates, instance.budget, cap);
  for (std::uint64_t r = begin; r < end; ++r) {
    const SubsetValue sv = subset_value(instance, subset);
    if (sv.singular) {
      ++best.singular;
    } else if (sv.value < best.value) {
      best.value = sv.value;
      best.rank = r;
      best.subset = subset;
    }
    if (r + 1 < end) next_combination(subset, instance.num_candidates);
  }
  return best;
}

void collect_ties_chunk(const ProblemInstance& instance, std::uint64_t begin,
                        std::uint64_t end, std::uint64_t cap, double best_value,
                        double tol, std::vector<std::vector<int>>& out) {
  if (begin >= end) return;
  std::vector<int> subset =
      unrank_combination(begin, instance.num_candidates, instance.budget, cap);
  for (std::uint64_t r = begin; r < end; ++r) {
    const SubsetValue sv = subset_value(instance, subset);
    if (!sv.singular && std::abs(sv.value - best_value) <= tol) {
      out.push_back(subset);
    }
    if (r + 1 < end) next_combination(subset, instance.num_candidates);
  }
}

OracleResult oracle_impl(const ProblemInstance& instance, const OracleConfig& cfg,
                         int workers) {
  const ValidationReport report = validate(instance);
  if (!report.ok) {
    throw std::invalid_argument("exhaustive_best_subset: invalid instance: " + report.joined());
  }
  const std::uint64_t total =
      binomial_capped(instance.num_candidates, instance.budget, cfg.cap);
  if (total > cfg.cap) {
    throw std::runtime_error("exhaustive_best_subset: C(N,K) exceeds cap " +
                             std::to_string(cfg.cap));
  }

  const int chunks = std::max(1, std::min<int>(workers, static_cast<int>(
                                  std::min<std::uint64_t>(total, 1u << 8))));
  std::vector<ChunkBest> bests(static_cast<size_t>(chunks));

#pragma omp parallel for schedule(static) num_threads(workers) if (chunks > 1)
  for (int c = 0; c < chunks; ++c) {
    const std::uint64_t begin = total * static_cast<std::uint64_t>(c) / chunks;
    const std::uint64_t end = total * (static_cast<std::uint64_t>(c) + 1) / chunks;
    bests[static_cast<size_t>(c)] = scan_chunk(instance, begin, end, cfg.cap);
  }

  // Deterministic reduce: value first, then lexicographic (= enumeration) rank.
  OracleResult result;
  result.evaluated = total;
  ChunkBest best;
  for (const ChunkBest& cb : bests) {
    result.singular_skipped += cb.singular;
    if (cb.subset.empty()) continue;
    if (cb.value < best.value || (cb.value == best.value && cb.rank < best.rank)) {
      best.value = cb.value;
      best.rank = cb.rank;
      best.subset = cb.subset;
    }
  }
  if (best.subset.empty()) {
    throw std::runtime_error("exhaustive_best_subset: every subset is singular");
  }
  result.best_subset = best.subset;
  result.best_value = best.value;

  const double tol = cfg.tie_tol * std::max(1.0, std::abs(best.value));
  std::vector<std::vector<std::vector<int>>> tie_chunks(static_cast<size_t>(chunks));
#pragma omp parallel for schedule(static) num_threads(workers) if (chunks > 1)
  for (int c = 0; c < chunks; ++c) {
    const std::uint64_t begin = total * static_cast<std::uint64_t>(c) / chunks;
    const std::uint64_t end = total * (static_cast<std::uint64_t>(c) + 1) / chunks;
    collect_ties_chunk(instance, begin, end, cfg.cap, best.value, tol,
                       tie_chunks[static_cast<size_t>(c)]);
  }
  for (auto& chunk : tie_chunks) {
    for (auto& subset : chunk) result.ties.push_back(std::move(subset));
  }
  return result;
}

}  // namespace

std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  const std::uint64_t limit = cap + 1;
  std::uint64_t value = 1;
  for (int i = 1; i <= k; ++i) {
    // value * (n - k + i) / i is exact at every step.
    const std::uint64_t numerator = static_cast<std::uint64_t>(n - k + i);
    if (value > (std::numeric_limits<std::uint64_t>::max() / numerator)) return limit;
    value = value * numerator / static_cast<std::uint64_t>(i);
    if (value > limit) return limit;
  }
  return value;
}

OracleResult exhaustive_best_subset(const ProblemInstance& instance, const OracleConfig& cfg) {
  return oracle_impl(instance, cfg, thread_cap());
}

OracleResult exhaustive_best_subset_serial(const ProblemInstance& instance,
                                           const OracleConfig& cfg) {
  return oracle_impl(instance, cfg, 1);
}

FeasibilityReport check_primal_feasibility(const ProblemInstance& instance,
                                           const SelectionWeights& w,
                                           const std::vector<double>& mu, double eig_tol) {
  FeasibilityReport report;
  auto fail = [&](const std::string& msg) {
    report.feasible = false;
    report.violations.push_back(msg);
  };

  if (static_cast<int>(w.w.size()) != instance.num_candidates ||
      static_cast<int>(mu.size()) != instance.param_dim) {
    throw std::invalid_argument("check_primal_feasibility: dimension mismatch");
  }
  for (size_t n = 0; n < w.w.size(); ++n) {
    if (!(w.w[n] >= -1e-9 && w.w[n] <= 1.0 + 1e-9)) {
      fail("w[" + std::to_string(n) + "] outside [0, 1]");
    }
  }
  if (std::abs(w.sum() - instance.budget) > 1e-9 * std::max(1, instance.budget)) {
    fail("budget: sum(w) != K");
  }

  const int p_total = instance.param_dim;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p_total, p_total);
  for (int n = 0; n < instance.num_candidates; ++n) {
    if (w.w[static_cast<size_t>(n)] != 0.0) {
      a += w.w[static_cast<size_t>(n)] * instance.fims[static_cast<size_t>(n)].m();
    }
  }
  for (int p = 0; p < p_total; ++p) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(p_total + 1, p_total + 1);
    block.topLeftCorner(p_total, p_total) = a;
    block(p, p_total) = 1.0;
    block(p_total, p) = 1.0;
    block(p_total, p_total) = mu[static_cast<size_t>(p)];
    const SymMatrix sym(block);
    const double tol = eig_tol * (1.0 + sym.frobenius_norm());
    if (min_eigenvalue(sym) < -tol) {
      fail("block " + std::to_string(p) + ": constraint matrix not PSD");
    }
  }
  return report;
}

DualityReport check_weak_duality(const ProblemInstance& instance, const DualState& state,
                                 const OracleResult& oracle) {
  DualityReport report;
  report.dual = dual_value(instance, state);
  report.primal_bound = oracle.best_value;
  report.slack = report.primal_bound - report.dual;
  report.ok = report.dual <= report.primal_bound + 1e-9 * (1.0 + std::abs(report.primal_bound));
  return report;
}

}  // namespace sampdes
