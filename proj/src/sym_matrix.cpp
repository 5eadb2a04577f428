#include "sampdes/sym_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sampdes {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument("SymMatrix: matrix must be square and non-empty, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(int dim) {
  return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
}

SymMatrix SymMatrix::identity(int dim) {
  return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SymMatrix SymMatrix::from_row_major(int dim, std::span<const double> values) {
  if (dim < 1) {
    throw std::invalid_argument("SymMatrix: dim must be >= 1");
  }
  if (values.size() != static_cast<size_t>(dim) * static_cast<size_t>(dim)) {
    throw std::invalid_argument("SymMatrix: expected " + std::to_string(dim * dim) +
                                " values, got " + std::to_string(values.size()));
  }
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = values[static_cast<size_t>(i) * dim + j];
    }
  }
  return SymMatrix(m);
}

std::vector<double> SymMatrix::to_row_major() const {
  std::vector<double> out(static_cast<size_t>(dim()) * dim());
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      out[static_cast<size_t>(i) * dim() + j] = m_(i, j);
    }
  }
  return out;
}

bool SymMatrix::operator==(const SymMatrix& other) const {
  if (dim() != other.dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      if (m_(i, j) != other.m_(i, j)) return false;
    }
  }
  return true;
}

double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("frobenius_inner: dimension mismatch " +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  return (a.m().array() * b.m().array()).sum();
}

double min_eigenvalue(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.m(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("min_eigenvalue: eigendecomposition failed");
  }
  return es.eigenvalues()(0);
}

std::optional<std::vector<double>> inverse_diagonal(const SymMatrix& a, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.m());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("inverse_diagonal: eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = es.eigenvalues();
  const int n = a.dim();
  const double lambda_max = evals(n - 1);
  if (evals(0) <= rel_tol * std::max(1.0, lambda_max)) {
    return std::nullopt;
  }
  const Eigen::MatrixXd& v = es.eigenvectors();
  std::vector<double> diag(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += v(p, j) * v(p, j) / evals(j);
    }
    diag[static_cast<size_t>(p)] = acc;
  }
  return diag;
}

}  // namespace sampdes
