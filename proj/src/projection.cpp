#include "sampdes/projection.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sampdes {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

struct FEval {
  SymMatrix projected;
  double f = 0.0;
};

// One evaluation of f(lambda); costs one eigendecomposition.
FEval eval_residual(const SymMatrix& g, const ConstraintSpec& spec, double lambda) {
  SymMatrix shifted(g.m() + lambda * spec.e_matrix.m());
  FEval out{project_psd(shifted), 0.0};
  out.f = frobenius_inner(out.projected, spec.e_matrix) - spec.phi;
  return out;
}

}  // namespace

ConstraintSpec::ConstraintSpec(SymMatrix e, double phi_value)
    : e_matrix(std::move(e)), phi(phi_value) {
  if (!(phi >= 0.0)) {
    throw std::invalid_argument("ConstraintSpec: phi must be >= 0");
  }
  if (!all_finite(e_matrix.m())) {
    throw std::invalid_argument("ConstraintSpec: E has non-finite entries");
  }
  const double tol = 1e-9 * (1.0 + e_matrix.frobenius_norm());
  if (min_eigenvalue(e_matrix) < -tol) {
    throw std::invalid_argument("ConstraintSpec: E must be PSD");
  }
}

ConstraintSpec ConstraintSpec::corner(int dim, double phi_value) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
  e(dim - 1, dim - 1) = 1.0;
  return ConstraintSpec(SymMatrix(e), phi_value);
}

SymMatrix project_psd(const SymMatrix& g) {
  if (!all_finite(g.m())) {
    throw std::invalid_argument("project_psd: non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.m());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("project_psd: eigendecomposition failed");
  }
  if (es.eigenvalues()(0) >= 0.0) {
    return g;
  }
  Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd rebuilt =
      es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return SymMatrix(rebuilt);
}

double constraint_residual(const SymMatrix& g, const ConstraintSpec& spec, double lambda) {
  if (g.dim() != spec.e_matrix.dim()) {
    throw std::invalid_argument("constraint_residual: dimension mismatch");
  }
  return eval_residual(g, spec, lambda).f;
}

ProjectionReport project_constrained(const SymMatrix& g, const ConstraintSpec& spec,
                                     const ProjectionConfig& cfg) {
  if (g.dim() != spec.e_matrix.dim()) {
    throw std::invalid_argument("project_constrained: dimension mismatch");
  }
  const double tol = cfg.root_tol * std::max(1.0, spec.phi);

  ProjectionReport report;
  auto accept = [&](const FEval& ev, double lambda, double lo, double hi) {
    report.result = ev.projected;
    report.lambda = lambda;
    report.residual = std::abs(ev.f);
    report.bracket = {lo, hi};
    return report;
  };

  // lambda = 0 is the root whenever g is already feasible.
  FEval at_zero = eval_residual(g, spec, 0.0);
  ++report.eig_calls;
  if (std::abs(at_zero.f) <= tol) {
    return accept(at_zero, 0.0, 0.0, 0.0);
  }

  // Symmetric doubling from [-R, R] until f changes sign. f is nondecreasing,
  // so a satisfied endpoint keeps its sign as the interval widens.
  double radius = 1.0 + g.frobenius_norm() + spec.phi;
  double lo = -radius, hi = radius;
  FEval at_lo = eval_residual(g, spec, lo);
  ++report.eig_calls;
  if (std::abs(at_lo.f) <= tol) return accept(at_lo, lo, lo, hi);
  FEval at_hi = eval_residual(g, spec, hi);
  ++report.eig_calls;
  if (std::abs(at_hi.f) <= tol) return accept(at_hi, hi, lo, hi);

  int doublings = 0;
  while (at_lo.f > 0.0 || at_hi.f < 0.0) {
    if (++doublings > cfg.max_doublings) {
      throw std::runtime_error(
          "project_constrained: no sign-change bracket after " +
          std::to_string(cfg.max_doublings) +
          " doublings (degenerate E or non-finite input?)");
    }
    radius *= 2.0;
    lo = -radius;
    hi = radius;
    if (at_lo.f > 0.0) {
      at_lo = eval_residual(g, spec, lo);
      ++report.eig_calls;
      if (std::abs(at_lo.f) <= tol) return accept(at_lo, lo, lo, hi);
    }
    if (at_hi.f < 0.0) {
      at_hi = eval_residual(g, spec, hi);
      ++report.eig_calls;
      if (std::abs(at_hi.f) <= tol) return accept(at_hi, hi, lo, hi);
    }
  }

  const std::pair<double, double> bracket{lo, hi};
  for (int it = 0; it < cfg.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    FEval at_mid = eval_residual(g, spec, mid);
    ++report.eig_calls;
    if (std::abs(at_mid.f) <= tol) {
      return accept(at_mid, mid, bracket.first, bracket.second);
    }
    if (at_mid.f > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw std::runtime_error("project_constrained: residual tolerance not met after " +
                           std::to_string(cfg.max_bisections) + " bisections");
}

}  // namespace sampdes
