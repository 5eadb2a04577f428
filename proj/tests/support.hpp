#pragma once

// Shared generators for the property tests. Everything is seeded explicitly;
// tests stay deterministic.

#include "sampdes/problem.hpp"
#include "sampdes/projection.hpp"
#include "sampdes/solver.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testsupport {

inline Eigen::MatrixXd random_square(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline sampdes::SymMatrix random_symmetric(int dim, std::mt19937_64& rng) {
  return sampdes::SymMatrix(random_square(dim, rng));
}

inline sampdes::SymMatrix random_psd(int dim, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = random_square(dim, rng);
  return sampdes::SymMatrix(Eigen::MatrixXd(a * a.transpose()));
}

/// Random member of {V >= 0 : <V, E> = phi}: PSD draw rescaled onto the slice.
inline sampdes::SymMatrix random_constrained_point(const sampdes::ConstraintSpec& spec,
                                                   std::mt19937_64& rng) {
  for (;;) {
    const sampdes::SymMatrix v = random_psd(spec.e_matrix.dim(), rng);
    const double s = sampdes::frobenius_inner(v, spec.e_matrix);
    if (s > 1e-8) {
      return sampdes::SymMatrix(Eigen::MatrixXd((spec.phi / s) * v.m()));
    }
  }
}

inline sampdes::ProblemInstance random_linear_instance(int n, int k, int p,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  sampdes::ModelSpec spec;
  spec.kind = sampdes::ModelSpec::Kind::linear_gaussian;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(p);
    for (int j = 0; j < p; ++j) x(j) = normal(rng);
    spec.designs.push_back(std::move(x));
  }
  return sampdes::build_instance(spec, k);
}

/// Random feasible dual state: per block, a PSD draw rescaled so the corner
/// equals the block's weight exactly.
inline sampdes::DualState random_feasible_dual_state(const sampdes::ProblemInstance& instance,
                                                     std::mt19937_64& rng) {
  sampdes::DualState state;
  const int p_total = instance.param_dim;
  for (int p = 0; p < p_total; ++p) {
    const double psi = instance.crlb_weights[static_cast<size_t>(p)];
    for (;;) {
      const sampdes::SymMatrix u = random_psd(p_total + 1, rng);
      const double corner = u(p_total, p_total);
      if (corner <= 1e-8) continue;
      Eigen::MatrixXd scaled = (psi / corner) * u.m();
      scaled(p_total, p_total) = psi;  // exact corner; the shift is O(ulp)
      state.blocks.push_back({sampdes::SymMatrix(scaled)});
      break;
    }
  }
  return state;
}

}  // namespace testsupport
