#pragma once

#include "sampdes/oracle.hpp"
#include "sampdes/solver.hpp"

#include <string>

namespace sampdes {

/// Result file: JSON with selected, w_rounded, w_averaged, best_dual,
/// primal_rounded, gap, converged, iterations, singular_flag. Deterministic
/// byte-for-byte for identical results.
void write_result_json(const SolverResult& result, const std::string& path);

/// Trace file: one CSV row per iteration with header
/// iter,alpha,dual_value,best_dual,primal_rounded,gap,max_projection_residual,singular_flag.
void write_trace_csv(const SolverResult& result, const std::string& path);

void write_oracle_json(const OracleResult& result, const std::string& path);

/// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);

}  // namespace sampdes
