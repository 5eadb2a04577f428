#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace sampdes {

/// Dense symmetric matrix. Symmetry is enforced on construction by averaging
/// with the transpose, so entries (i,j) and (j,i) are bitwise equal.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Throws std::invalid_argument if m is empty or not square.
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix zero(int dim);
  static SymMatrix identity(int dim);

  /// Full matrix in row-major order, dim*dim values.
  static SymMatrix from_row_major(int dim, std::span<const double> values);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& m() const { return m_; }

  double frobenius_norm() const { return m_.norm(); }
  std::vector<double> to_row_major() const;

  bool operator==(const SymMatrix& other) const;

 private:
  Eigen::MatrixXd m_;
};

/// <a, b> = sum_ij a(i,j) * b(i,j). Throws on dimension mismatch.
double frobenius_inner(const SymMatrix& a, const SymMatrix& b);

double min_eigenvalue(const SymMatrix& a);

/// Diagonal of inverse(a), computed from the symmetric eigendecomposition.
/// Returns nullopt when a is numerically singular, i.e.
/// lambda_min <= rel_tol * max(1, lambda_max).
std::optional<std::vector<double>> inverse_diagonal(const SymMatrix& a,
                                                    double rel_tol = 1e-12);

}  // namespace sampdes
