#pragma once

#include "sampdes/sym_matrix.hpp"

#include <utility>

namespace sampdes {

struct ProjectionConfig {
  double root_tol = 1e-10;
  /// Scale-relative base: a matrix m counts as PSD when
  /// min_eigenvalue(m) >= -eig_tol * (1 + ||m||_F).
  double eig_tol = 1e-9;
  int max_doublings = 60;
  int max_bisections = 200;
};

/// Affine slice of the PSD cone: {U >= 0 : <U, E> = phi}.
struct ConstraintSpec {
  SymMatrix e_matrix;
  double phi = 0.0;

  /// Throws std::invalid_argument unless e is PSD (up to eig tolerance)
  /// and phi >= 0.
  ConstraintSpec(SymMatrix e, double phi_value);

  /// E = e_dim e_dim^T, the last-coordinate indicator.
  static ConstraintSpec corner(int dim, double phi_value);
};

struct ProjectionReport {
  SymMatrix result;
  double lambda = 0.0;    // root of <P_psd(g + lambda E), E> = phi
  double residual = 0.0;  // |f(lambda)| at the accepted root
  int eig_calls = 0;
  std::pair<double, double> bracket{0.0, 0.0};  // sign-change interval used
};

/// Nearest PSD matrix: eigendecompose and clip negative eigenvalues to zero.
/// Returns g itself (bitwise) when g is already PSD.
/// Throws std::invalid_argument on non-finite entries.
SymMatrix project_psd(const SymMatrix& g);

/// f(lambda) = <P_psd(g + lambda E), E> - phi. Nondecreasing in lambda.
double constraint_residual(const SymMatrix& g, const ConstraintSpec& spec, double lambda);

/// Projection onto {U >= 0 : <U, E> = phi}: finds the root of f by interval
/// doubling followed by bisection, then returns P_psd(g + lambda E).
/// Throws std::runtime_error if no sign-change bracket is found within
/// max_doublings or the residual tolerance is not met within max_bisections.
ProjectionReport project_constrained(const SymMatrix& g, const ConstraintSpec& spec,
                                     const ProjectionConfig& cfg = {});

}  // namespace sampdes
