#pragma once

#include "sampdes/sym_matrix.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sampdes {

/// One selection problem: pick `budget` of the `num_candidates` candidate
/// sampling points, where candidate n contributes the Fisher information
/// matrix fims[n] (param_dim x param_dim, PSD). crlb_weights weight the
/// per-parameter variance bounds in the objective. Immutable by convention
/// after construction.
struct ProblemInstance {
  int num_candidates = 0;  // N
  int budget = 0;          // K
  int param_dim = 0;       // P
  std::vector<SymMatrix> fims;
  std::vector<double> crlb_weights;            // psi, one per parameter
  std::vector<std::vector<double>> labels;     // optional sampling-point descriptors
  std::string meta;                            // optional free-form JSON text
};

/// Relaxed selection weights: N values in [0,1] summing to the budget.
struct SelectionWeights {
  std::vector<double> w;

  double sum() const;
  bool is_binary(double tol = 0.0) const;
  /// Indices with w > 0.5, ascending.
  std::vector<int> selected_indices() const;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;

  std::string joined() const;
};

struct ValidateOptions {
  /// crlb_weights must be strictly positive by default; zero entries make
  /// the corresponding dual block degenerate.
  bool allow_zero_psi = false;
  double eig_tol = 1e-9;  // scale-relative base for the PSD checks
};

ValidationReport validate(const ProblemInstance& instance, const ValidateOptions& opts = {});

/// Membership in the feasible weight set: 0 <= w_n <= 1, sum w = budget.
bool weights_feasible(const ProblemInstance& instance, const SelectionWeights& w,
                      double tol = 1e-9);

// --- Fisher information generators for example observation models ---------

/// F_n = x_n x_n^T / noise_var for observations y_n = x_n^T theta + noise.
std::vector<SymMatrix> linear_gaussian_fims(const std::vector<Eigen::VectorXd>& designs,
                                            double noise_var);

/// s(t; a, f, ph) = a sin(2 pi f t + ph), white Gaussian noise. P = 3.
std::vector<SymMatrix> sinusoid_fims(const std::vector<double>& grid, double amplitude,
                                     double frequency, double phase, double noise_var);

/// s(t; a, b) = a exp(-b t), white Gaussian noise. P = 2.
std::vector<SymMatrix> exponential_decay_fims(const std::vector<double>& grid,
                                              double amplitude, double rate,
                                              double noise_var);

struct ModelSpec {
  enum class Kind { linear_gaussian, sinusoid, exponential_decay, explicit_fims };
  Kind kind = Kind::linear_gaussian;

  std::vector<Eigen::VectorXd> designs;  // linear_gaussian
  double noise_var = 1.0;
  // sinusoid: {amplitude, frequency, phase}; exponential_decay: {amplitude, rate}
  std::vector<double> theta0;
  std::vector<double> grid;      // sampling points t_n for the 1-D models
  std::vector<SymMatrix> fims;   // explicit_fims
};

/// Assemble a full instance from a model spec. crlb_weights default to all
/// ones when psi is empty. Labels are the design vectors (linear) or the
/// grid points (1-D models). Throws std::invalid_argument on bad specs.
ProblemInstance build_instance(const ModelSpec& spec, int budget,
                               std::vector<double> psi = {});

// --- Instance file I/O -----------------------------------------------------

/// JSON schema: {n, k, p, psi: [P], fims: [N][P*P row-major],
/// labels?: [N][..], meta?: {...}}. Non-finite numbers are rejected.
/// Throws std::runtime_error naming the offending field.
ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& instance, const std::string& path);

}  // namespace sampdes
