#pragma once

#include "sampdes/problem.hpp"
#include "sampdes/projection.hpp"
#include "sampdes/sym_matrix.hpp"

#include <vector>

namespace sampdes {

/// One dual multiplier block: a PSD matrix of dimension param_dim + 1,
/// partitioned into the leading principal block, the off-diagonal edge
/// vector, and the corner scalar (pinned to the block's CRLB weight by the
/// constrained projection).
struct DualBlock {
  SymMatrix full;

  int param_dim() const { return full.dim() - 1; }
  Eigen::MatrixXd principal() const {
    return full.m().topLeftCorner(param_dim(), param_dim());
  }
  Eigen::VectorXd edge() const { return full.m().block(0, param_dim(), param_dim(), 1); }
  double corner() const { return full.m()(param_dim(), param_dim()); }
};

struct DualState {
  std::vector<DualBlock> blocks;  // one per parameter
  int iteration = 0;
};

/// Feasible starting point: block p is psi_p times the corner indicator,
/// which scores every candidate as zero on the first iteration.
DualState initial_dual_state(const ProblemInstance& instance);

enum class StepKind { constant, diminishing };
enum class SingularPolicy { ridge, cap };

struct SolverConfig {
  StepKind step = StepKind::diminishing;  // alpha_t = alpha0 / sqrt(t)
  /// <= 0 selects the scale-aware default 1 / (1 + max_n ||F_n||_F).
  double alpha0 = 0.0;
  int max_iters = 1000;
  /// Stop when (best rounded primal - best dual) / max(1, |best primal|) <= gap_tol.
  double gap_tol = 1e-6;
  SingularPolicy singular_policy = SingularPolicy::ridge;
  double cap_value = 1e12;
  ProjectionConfig projection{};
  // Ties in the top-k selection always break toward the lowest index, and the
  // averaged weights accumulate every iterate; neither is configurable.
};

struct TraceRecord {
  int iter = 0;  // 1-based
  double alpha = 0.0;
  double dual_value = 0.0;
  double best_dual = 0.0;
  double primal_rounded = 0.0;  // value of this iteration's binary minimizer
  double gap = 0.0;             // best rounded primal so far minus best dual
  double max_projection_residual = 0.0;
  bool singular_flag = false;
};

struct SolverResult {
  std::vector<int> selected;   // sorted, exactly budget indices
  SelectionWeights w_rounded;  // binary indicator of `selected`
  SelectionWeights w_averaged; // running mean of per-iteration minimizers
  double best_dual = 0.0;
  double primal_rounded = 0.0; // objective of w_rounded
  double gap = 0.0;            // primal_rounded - best_dual
  bool converged = false;      // gap_tol met before max_iters
  int iterations = 0;
  bool singular_flag = false;  // final objective needed the singular policy
  std::vector<TraceRecord> trace;
};

/// Per-candidate score <F_n, sum_p principal_p>: the sensitivity of the dual
/// objective to candidate n. The principal sum is formed once in fixed block
/// order; candidates are scored in parallel.
std::vector<double> candidate_scores(const ProblemInstance& instance, const DualState& state);
/// Serial reference for the kernel above; bitwise-identical results.
std::vector<double> candidate_scores_serial(const ProblemInstance& instance,
                                            const DualState& state);

/// Binary weights with ones on the k largest scores; equal scores resolve
/// toward the lower index.
SelectionWeights select_top_k(const std::vector<double>& scores, int k);

struct MuResult {
  std::vector<double> mu;  // diagonal of inverse(sum_n w_n F_n), one per parameter
  bool singular = false;   // true when the singular policy was applied
};

/// mu_p = [A(w)^-1]_pp with A(w) = sum_n w_n F_n. When A is singular, the
/// ridge policy retries with A + eps*I (eps = 1e-10 * trace(A)/P) and the cap
/// policy reports cap_value for every parameter.
MuResult crlb_mu(const ProblemInstance& instance, const SelectionWeights& w,
                 const SolverConfig& cfg = {});

/// q(state) = -sum_{n selected} score_n - 2 sum_p edge_p[p], with the
/// selection minimizing over the weight polytope.
double dual_value(const ProblemInstance& instance, const DualState& state);

/// Supergradient component p: the negated constraint block
/// [[A(w), e_p], [e_p^T, mu_p]] assembled from the current minimizers.
std::vector<SymMatrix> dual_subgradient(const ProblemInstance& instance,
                                        const SelectionWeights& w,
                                        const std::vector<double>& mu);

struct AscentResult {
  DualState state;
  double max_projection_residual = 0.0;
  int eig_calls = 0;
};

/// One projected step: block p moves along grads[p] scaled by alpha, then is
/// projected back onto {U >= 0 : corner == psi_p}. Blocks are independent and
/// projected in parallel.
AscentResult ascent_step(const ProblemInstance& instance, const DualState& state,
                         const std::vector<SymMatrix>& grads, double alpha,
                         const ProjectionConfig& cfg = {});
/// Serial reference for the kernel above; bitwise-identical results.
AscentResult ascent_step_serial(const ProblemInstance& instance, const DualState& state,
                                const std::vector<SymMatrix>& grads, double alpha,
                                const ProjectionConfig& cfg = {});

/// Weighted CRLB objective sum_p psi_p * mu_p(w).
double primal_value(const ProblemInstance& instance, const SelectionWeights& w,
                    const SolverConfig& cfg = {});

/// Dual projected subgradient ascent with primal recovery by averaging the
/// per-iteration binary minimizers. Deterministic given instance + config.
/// Throws std::invalid_argument when the instance fails validation.
SolverResult solve(const ProblemInstance& instance, const SolverConfig& cfg = {});

/// The step-size base actually used by solve() for this instance.
double effective_alpha0(const ProblemInstance& instance, const SolverConfig& cfg);

}  // namespace sampdes
