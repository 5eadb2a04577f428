#include "sampdes/solver.hpp"

#include "sampdes/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sampdes {

namespace {

Eigen::MatrixXd principal_sum(const DualState& state, int p) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  for (const DualBlock& block : state.blocks) {
    sum += block.full.m().topLeftCorner(p, p);
  }
  return sum;
}

Eigen::MatrixXd weighted_fim_sum(const ProblemInstance& instance, const SelectionWeights& w) {
  const int p = instance.param_dim;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int n = 0; n < instance.num_candidates; ++n) {
    const double wn = w.w[static_cast<size_t>(n)];
    if (wn != 0.0) {
      a += wn * instance.fims[static_cast<size_t>(n)].m();
    }
  }
  return a;
}

void check_state(const ProblemInstance& instance, const DualState& state, const char* who) {
  if (static_cast<int>(state.blocks.size()) != instance.param_dim) {
    throw std::invalid_argument(std::string(who) + ": state has " +
                                std::to_string(state.blocks.size()) + " blocks, expected " +
                                std::to_string(instance.param_dim));
  }
  for (const DualBlock& block : state.blocks) {
    if (block.full.dim() != instance.param_dim + 1) {
      throw std::invalid_argument(std::string(who) + ": dual block dimension mismatch");
    }
  }
}

std::vector<double> scores_impl(const ProblemInstance& instance, const DualState& state,
                                bool parallel) {
  check_state(instance, state, "candidate_scores");
  const Eigen::MatrixXd sum = principal_sum(state, instance.param_dim);
  const int n_total = instance.num_candidates;
  std::vector<double> scores(static_cast<size_t>(n_total));
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(thread_cap())
    for (int n = 0; n < n_total; ++n) {
      scores[static_cast<size_t>(n)] =
          (instance.fims[static_cast<size_t>(n)].m().array() * sum.array()).sum();
    }
  } else {
    for (int n = 0; n < n_total; ++n) {
      scores[static_cast<size_t>(n)] =
          (instance.fims[static_cast<size_t>(n)].m().array() * sum.array()).sum();
    }
  }
  return scores;
}

double dual_value_from_scores(const std::vector<double>& scores, const SelectionWeights& w,
                              const DualState& state) {
  double weighted = 0.0;
  for (size_t n = 0; n < scores.size(); ++n) {
    if (w.w[n] != 0.0) weighted += w.w[n] * scores[n];
  }
  double edge_sum = 0.0;
  for (size_t p = 0; p < state.blocks.size(); ++p) {
    edge_sum += state.blocks[p].full.m()(static_cast<int>(p),
                                         state.blocks[p].param_dim());
  }
  return -weighted - 2.0 * edge_sum + 0.0;  // +0.0 normalizes -0
}

AscentResult ascent_impl(const ProblemInstance& instance, const DualState& state,
                         const std::vector<SymMatrix>& grads, double alpha,
                         const ProjectionConfig& cfg, [[maybe_unused]] bool parallel) {
  check_state(instance, state, "ascent_step");
  if (grads.size() != state.blocks.size()) {
    throw std::invalid_argument("ascent_step: one gradient block per dual block required");
  }
  const int p_total = instance.param_dim;
  AscentResult out;
  out.state.blocks.resize(static_cast<size_t>(p_total));
  out.state.iteration = state.iteration + 1;
  std::vector<double> residuals(static_cast<size_t>(p_total), 0.0);
  std::vector<int> eig_calls(static_cast<size_t>(p_total), 0);

  std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(thread_cap()) if (parallel)
  for (int p = 0; p < p_total; ++p) {
    try {
      const SymMatrix moved(state.blocks[static_cast<size_t>(p)].full.m() +
                            alpha * grads[static_cast<size_t>(p)].m());
      const ConstraintSpec spec =
          ConstraintSpec::corner(p_total + 1, instance.crlb_weights[static_cast<size_t>(p)]);
      ProjectionReport report = project_constrained(moved, spec, cfg);
      out.state.blocks[static_cast<size_t>(p)].full = std::move(report.result);
      residuals[static_cast<size_t>(p)] = report.residual;
      eig_calls[static_cast<size_t>(p)] = report.eig_calls;
    } catch (...) {
#pragma omp critical
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (int p = 0; p < p_total; ++p) {
    out.max_projection_residual =
        std::max(out.max_projection_residual, residuals[static_cast<size_t>(p)]);
    out.eig_calls += eig_calls[static_cast<size_t>(p)];
  }
  return out;
}

}  // namespace

DualState initial_dual_state(const ProblemInstance& instance) {
  DualState state;
  state.blocks.resize(static_cast<size_t>(instance.param_dim));
  for (int p = 0; p < instance.param_dim; ++p) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(instance.param_dim + 1, instance.param_dim + 1);
    block(instance.param_dim, instance.param_dim) = instance.crlb_weights[static_cast<size_t>(p)];
    state.blocks[static_cast<size_t>(p)].full = SymMatrix(block);
  }
  return state;
}

std::vector<double> candidate_scores(const ProblemInstance& instance, const DualState& state) {
  return scores_impl(instance, state, true);
}

std::vector<double> candidate_scores_serial(const ProblemInstance& instance,
                                            const DualState& state) {
  return scores_impl(instance, state, false);
}

SelectionWeights select_top_k(const std::vector<double>& scores, int k) {
  const int n = static_cast<int>(scores.size());
  if (k < 1 || k > n) {
    throw std::invalid_argument("select_top_k: k must be in [1, " + std::to_string(n) + "]");
  }
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)]) {
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    }
    return a < b;
  });
  SelectionWeights w;
  w.w.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < k; ++i) {
    w.w[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1.0;
  }
  return w;
}

MuResult crlb_mu(const ProblemInstance& instance, const SelectionWeights& w,
                 const SolverConfig& cfg) {
  if (static_cast<int>(w.w.size()) != instance.num_candidates) {
    throw std::invalid_argument("crlb_mu: weight count mismatch");
  }
  const Eigen::MatrixXd a = weighted_fim_sum(instance, w);
  if (!a.allFinite()) {
    throw std::runtime_error("crlb_mu: weighted information matrix is not finite");
  }
  MuResult out;
  if (auto diag = inverse_diagonal(SymMatrix(a)); diag) {
    out.mu = std::move(*diag);
    return out;
  }
  out.singular = true;
  if (cfg.singular_policy == SingularPolicy::cap) {
    out.mu.assign(static_cast<size_t>(instance.param_dim), cfg.cap_value);
    return out;
  }
  // Ridge keeps the iteration alive on a non-identifying selection. A zero
  // trace leaves nothing to scale, so fall back to an absolute ridge.
  double eps = 1e-10 * a.trace() / instance.param_dim;
  if (!(eps > 0.0)) eps = 1e-10;
  const Eigen::MatrixXd ridged =
      a + eps * Eigen::MatrixXd::Identity(instance.param_dim, instance.param_dim);
  if (auto diag = inverse_diagonal(SymMatrix(ridged)); diag) {
    out.mu = std::move(*diag);
    return out;
  }
  out.mu.assign(static_cast<size_t>(instance.param_dim), cfg.cap_value);
  return out;
}

double dual_value(const ProblemInstance& instance, const DualState& state) {
  const std::vector<double> scores = candidate_scores(instance, state);
  const SelectionWeights w = select_top_k(scores, instance.budget);
  return dual_value_from_scores(scores, w, state);
}

std::vector<SymMatrix> dual_subgradient(const ProblemInstance& instance,
                                        const SelectionWeights& w,
                                        const std::vector<double>& mu) {
  if (static_cast<int>(mu.size()) != instance.param_dim) {
    throw std::invalid_argument("dual_subgradient: mu size mismatch");
  }
  const int p_total = instance.param_dim;
  const Eigen::MatrixXd a = weighted_fim_sum(instance, w);
  std::vector<SymMatrix> grads;
  grads.reserve(static_cast<size_t>(p_total));
  for (int p = 0; p < p_total; ++p) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(p_total + 1, p_total + 1);
    block.topLeftCorner(p_total, p_total) = a;
    block(p, p_total) = 1.0;
    block(p_total, p) = 1.0;
    block(p_total, p_total) = mu[static_cast<size_t>(p)];
    grads.emplace_back(Eigen::MatrixXd(-block));
  }
  return grads;
}

AscentResult ascent_step(const ProblemInstance& instance, const DualState& state,
                         const std::vector<SymMatrix>& grads, double alpha,
                         const ProjectionConfig& cfg) {
  return ascent_impl(instance, state, grads, alpha, cfg, true);
}

AscentResult ascent_step_serial(const ProblemInstance& instance, const DualState& state,
                                const std::vector<SymMatrix>& grads, double alpha,
                                const ProjectionConfig& cfg) {
  return ascent_impl(instance, state, grads, alpha, cfg, false);
}

double primal_value(const ProblemInstance& instance, const SelectionWeights& w,
                    const SolverConfig& cfg) {
  const MuResult mu = crlb_mu(instance, w, cfg);
  double value = 0.0;
  for (int p = 0; p < instance.param_dim; ++p) {
    value += instance.crlb_weights[static_cast<size_t>(p)] * mu.mu[static_cast<size_t>(p)];
  }
  return value;
}

double effective_alpha0(const ProblemInstance& instance, const SolverConfig& cfg) {
  if (cfg.alpha0 > 0.0) return cfg.alpha0;
  double max_norm = 0.0;
  for (const SymMatrix& f : instance.fims) {
    max_norm = std::max(max_norm, f.frobenius_norm());
  }
  return 1.0 / (1.0 + max_norm);
}

SolverResult solve(const ProblemInstance& instance, const SolverConfig& cfg) {
  const ValidationReport report = validate(instance);
  if (!report.ok) {
    throw std::invalid_argument("solve: invalid instance: " + report.joined());
  }
  if (cfg.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");
  if (!(cfg.gap_tol >= 0.0)) throw std::invalid_argument("solve: gap_tol must be >= 0");

  const double alpha0 = effective_alpha0(instance, cfg);
  const int n_total = instance.num_candidates;

  DualState state = initial_dual_state(instance);
  std::vector<double> w_accum(static_cast<size_t>(n_total), 0.0);
  double best_dual = -std::numeric_limits<double>::infinity();
  double best_primal = std::numeric_limits<double>::infinity();

  SolverResult result;
  result.trace.reserve(static_cast<size_t>(cfg.max_iters));

  for (int t = 1; t <= cfg.max_iters; ++t) {
    const std::vector<double> scores = candidate_scores(instance, state);
    const SelectionWeights w = select_top_k(scores, instance.budget);
    const MuResult mu = crlb_mu(instance, w, cfg);

    const double q = dual_value_from_scores(scores, w, state);
    if (!std::isfinite(q)) {
      throw std::runtime_error("solve: non-finite dual value at iteration " +
                               std::to_string(t));
    }
    double primal = 0.0;
    for (int p = 0; p < instance.param_dim; ++p) {
      primal += instance.crlb_weights[static_cast<size_t>(p)] * mu.mu[static_cast<size_t>(p)];
    }

    best_dual = std::max(best_dual, q);
    // Ridged values do not certify a feasible point; keep them out of the gap.
    if (!mu.singular) best_primal = std::min(best_primal, primal);
    for (int n = 0; n < n_total; ++n) w_accum[static_cast<size_t>(n)] += w.w[static_cast<size_t>(n)];

    const double alpha =
        cfg.step == StepKind::constant ? alpha0 : alpha0 / std::sqrt(static_cast<double>(t));
    const std::vector<SymMatrix> grads = dual_subgradient(instance, w, mu.mu);
    AscentResult step = ascent_step(instance, state, grads, alpha, cfg.projection);
    state = std::move(step.state);

    result.trace.push_back({t, alpha, q, best_dual, primal, best_primal - best_dual,
                            step.max_projection_residual, mu.singular});
    result.iterations = t;

    const double rel_gap =
        (best_primal - best_dual) / std::max(1.0, std::abs(best_primal));
    if (rel_gap <= cfg.gap_tol) {
      result.converged = true;
      break;
    }
  }

  result.w_averaged.w.resize(static_cast<size_t>(n_total));
  for (int n = 0; n < n_total; ++n) {
    result.w_averaged.w[static_cast<size_t>(n)] =
        w_accum[static_cast<size_t>(n)] / result.iterations;
  }
  result.w_rounded = select_top_k(result.w_averaged.w, instance.budget);
  result.selected = result.w_rounded.selected_indices();

  const MuResult final_mu = crlb_mu(instance, result.w_rounded, cfg);
  result.singular_flag = final_mu.singular;
  result.primal_rounded = 0.0;
  for (int p = 0; p < instance.param_dim; ++p) {
    result.primal_rounded +=
        instance.crlb_weights[static_cast<size_t>(p)] * final_mu.mu[static_cast<size_t>(p)];
  }
  result.best_dual = best_dual;
  result.gap = result.primal_rounded - best_dual;
  return result;
}

}  // namespace sampdes
