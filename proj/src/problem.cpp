#include "sampdes/problem.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sampdes {

using nlohmann::ordered_json;

double SelectionWeights::sum() const {
  double acc = 0.0;
  for (double x : w) acc += x;
  return acc;
}

bool SelectionWeights::is_binary(double tol) const {
  for (double x : w) {
    if (std::abs(x) > tol && std::abs(x - 1.0) > tol) return false;
  }
  return true;
}

std::vector<int> SelectionWeights::selected_indices() const {
  std::vector<int> out;
  for (size_t n = 0; n < w.size(); ++n) {
    if (w[n] > 0.5) out.push_back(static_cast<int>(n));
  }
  return out;
}

std::string ValidationReport::joined() const {
  std::ostringstream os;
  for (size_t i = 0; i < errors.size(); ++i) {
    if (i > 0) os << "; ";
    os << errors[i];
  }
  return os.str();
}

ValidationReport validate(const ProblemInstance& instance, const ValidateOptions& opts) {
  ValidationReport report;
  auto fail = [&](const std::string& msg) {
    report.ok = false;
    report.errors.push_back(msg);
  };

  if (instance.param_dim < 1) fail("p: parameter dimension must be >= 1");
  if (instance.budget < 1) fail("k: budget must be >= 1");
  if (instance.budget > instance.num_candidates) fail("k: budget exceeds candidates");
  if (static_cast<int>(instance.fims.size()) != instance.num_candidates) {
    fail("fims: expected " + std::to_string(instance.num_candidates) + " matrices, got " +
         std::to_string(instance.fims.size()));
  }
  if (static_cast<int>(instance.crlb_weights.size()) != instance.param_dim) {
    fail("psi: expected " + std::to_string(instance.param_dim) + " weights, got " +
         std::to_string(instance.crlb_weights.size()));
  }
  if (!instance.labels.empty() &&
      static_cast<int>(instance.labels.size()) != instance.num_candidates) {
    fail("labels: expected one descriptor per candidate");
  }

  for (size_t i = 0; i < instance.fims.size(); ++i) {
    const SymMatrix& f = instance.fims[i];
    const std::string name = "fims[" + std::to_string(i) + "]";
    if (f.dim() != instance.param_dim) {
      fail(name + ": dimension " + std::to_string(f.dim()) + " != p");
      continue;
    }
    if (!f.m().allFinite()) {
      fail(name + ": non-finite entries");
      continue;
    }
    const double tol = opts.eig_tol * (1.0 + f.frobenius_norm());
    if (min_eigenvalue(f) < -tol) fail(name + ": FIM not PSD");
  }

  for (size_t p = 0; p < instance.crlb_weights.size(); ++p) {
    const double psi = instance.crlb_weights[p];
    if (!std::isfinite(psi) || psi < 0.0 || (psi == 0.0 && !opts.allow_zero_psi)) {
      fail("psi[" + std::to_string(p) + "]: must be > 0");
    }
  }
  return report;
}

bool weights_feasible(const ProblemInstance& instance, const SelectionWeights& w, double tol) {
  if (static_cast<int>(w.w.size()) != instance.num_candidates) return false;
  for (double x : w.w) {
    if (!(x >= -tol && x <= 1.0 + tol)) return false;
  }
  return std::abs(w.sum() - instance.budget) <= tol * std::max(1, instance.budget);
}

std::vector<SymMatrix> linear_gaussian_fims(const std::vector<Eigen::VectorXd>& designs,
                                            double noise_var) {
  if (!(noise_var > 0.0)) {
    throw std::invalid_argument("linear_gaussian_fims: noise_var must be > 0");
  }
  std::vector<SymMatrix> fims;
  fims.reserve(designs.size());
  for (const Eigen::VectorXd& x : designs) {
    fims.emplace_back(Eigen::MatrixXd(x * x.transpose() / noise_var));
  }
  return fims;
}

namespace {

std::vector<SymMatrix> rank1_fims(const std::vector<Eigen::VectorXd>& gradients,
                                  double noise_var) {
  return linear_gaussian_fims(gradients, noise_var);
}

}  // namespace

std::vector<SymMatrix> sinusoid_fims(const std::vector<double>& grid, double amplitude,
                                     double frequency, double phase, double noise_var) {
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(grid.size());
  for (double t : grid) {
    const double arg = 2.0 * std::numbers::pi * frequency * t + phase;
    Eigen::VectorXd g(3);
    g(0) = std::sin(arg);
    g(1) = amplitude * 2.0 * std::numbers::pi * t * std::cos(arg);
    g(2) = amplitude * std::cos(arg);
    grads.push_back(g);
  }
  return rank1_fims(grads, noise_var);
}

std::vector<SymMatrix> exponential_decay_fims(const std::vector<double>& grid,
                                              double amplitude, double rate,
                                              double noise_var) {
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(grid.size());
  for (double t : grid) {
    const double decay = std::exp(-rate * t);
    Eigen::VectorXd g(2);
    g(0) = decay;
    g(1) = -amplitude * t * decay;
    grads.push_back(g);
  }
  return rank1_fims(grads, noise_var);
}

ProblemInstance build_instance(const ModelSpec& spec, int budget, std::vector<double> psi) {
  ProblemInstance inst;
  inst.budget = budget;

  switch (spec.kind) {
    case ModelSpec::Kind::linear_gaussian: {
      if (spec.designs.empty()) {
        throw std::invalid_argument("build_instance: linear model needs design vectors");
      }
      inst.param_dim = static_cast<int>(spec.designs.front().size());
      for (const auto& x : spec.designs) {
        if (x.size() != inst.param_dim) {
          throw std::invalid_argument("build_instance: design vectors must share a dimension");
        }
      }
      inst.fims = linear_gaussian_fims(spec.designs, spec.noise_var);
      for (const auto& x : spec.designs) {
        inst.labels.emplace_back(x.data(), x.data() + x.size());
      }
      break;
    }
    case ModelSpec::Kind::sinusoid: {
      if (spec.theta0.size() != 3) {
        throw std::invalid_argument("build_instance: sinusoid needs theta0 = {a, f, phase}");
      }
      inst.param_dim = 3;
      inst.fims = sinusoid_fims(spec.grid, spec.theta0[0], spec.theta0[1], spec.theta0[2],
                                spec.noise_var);
      for (double t : spec.grid) inst.labels.push_back({t});
      break;
    }
    case ModelSpec::Kind::exponential_decay: {
      if (spec.theta0.size() != 2) {
        throw std::invalid_argument("build_instance: exponential decay needs theta0 = {a, b}");
      }
      inst.param_dim = 2;
      inst.fims =
          exponential_decay_fims(spec.grid, spec.theta0[0], spec.theta0[1], spec.noise_var);
      for (double t : spec.grid) inst.labels.push_back({t});
      break;
    }
    case ModelSpec::Kind::explicit_fims: {
      if (spec.fims.empty()) {
        throw std::invalid_argument("build_instance: explicit model needs matrices");
      }
      inst.param_dim = spec.fims.front().dim();
      inst.fims = spec.fims;
      break;
    }
  }

  inst.num_candidates = static_cast<int>(inst.fims.size());
  inst.crlb_weights =
      psi.empty() ? std::vector<double>(static_cast<size_t>(inst.param_dim), 1.0)
                  : std::move(psi);

  const ValidationReport report = validate(inst);
  if (!report.ok) {
    throw std::invalid_argument("build_instance: " + report.joined());
  }
  return inst;
}

namespace {

double finite_number(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) {
    throw std::runtime_error("instance file: " + where + " is not a number");
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    throw std::runtime_error("instance file: " + where + " is not finite");
  }
  return x;
}

const ordered_json& require_field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::runtime_error(std::string("instance file: missing field \"") + key + "\"");
  }
  return *it;
}

}  // namespace

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_instance: cannot open " + path);
  }
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("load_instance: parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw std::runtime_error("instance file: top level must be an object");
  }

  ProblemInstance inst;
  inst.num_candidates = require_field(j, "n").get<int>();
  inst.budget = require_field(j, "k").get<int>();
  inst.param_dim = require_field(j, "p").get<int>();
  if (inst.num_candidates < 1 || inst.param_dim < 1) {
    throw std::runtime_error("instance file: n and p must be >= 1");
  }

  const ordered_json& psi = require_field(j, "psi");
  if (!psi.is_array()) throw std::runtime_error("instance file: psi must be an array");
  for (size_t i = 0; i < psi.size(); ++i) {
    inst.crlb_weights.push_back(finite_number(psi[i], "psi[" + std::to_string(i) + "]"));
  }

  const ordered_json& fims = require_field(j, "fims");
  if (!fims.is_array()) throw std::runtime_error("instance file: fims must be an array");
  for (size_t n = 0; n < fims.size(); ++n) {
    const ordered_json& entry = fims[n];
    const std::string name = "fims[" + std::to_string(n) + "]";
    if (!entry.is_array() ||
        entry.size() != static_cast<size_t>(inst.param_dim) * inst.param_dim) {
      throw std::runtime_error("instance file: " + name + " must hold p*p numbers");
    }
    std::vector<double> values;
    values.reserve(entry.size());
    for (size_t i = 0; i < entry.size(); ++i) {
      values.push_back(finite_number(entry[i], name + "[" + std::to_string(i) + "]"));
    }
    inst.fims.push_back(SymMatrix::from_row_major(inst.param_dim, values));
  }

  if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw std::runtime_error("instance file: labels must be an array");
    for (size_t n = 0; n < it->size(); ++n) {
      const ordered_json& entry = (*it)[n];
      const std::string name = "labels[" + std::to_string(n) + "]";
      if (!entry.is_array()) throw std::runtime_error("instance file: " + name + " must be an array");
      std::vector<double> label;
      for (size_t i = 0; i < entry.size(); ++i) {
        label.push_back(finite_number(entry[i], name + "[" + std::to_string(i) + "]"));
      }
      inst.labels.push_back(std::move(label));
    }
  }
  if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    inst.meta = it->dump();
  }
  return inst;
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
  ordered_json j;
  j["n"] = instance.num_candidates;
  j["k"] = instance.budget;
  j["p"] = instance.param_dim;
  j["psi"] = instance.crlb_weights;
  ordered_json fims = ordered_json::array();
  for (const SymMatrix& f : instance.fims) fims.push_back(f.to_row_major());
  j["fims"] = std::move(fims);
  if (!instance.labels.empty()) j["labels"] = instance.labels;
  if (!instance.meta.empty()) {
    try {
      j["meta"] = ordered_json::parse(instance.meta);
    } catch (const nlohmann::json::exception&) {
      j["meta"] = instance.meta;  // keep as a plain string if not valid JSON
    }
  }

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_instance: cannot write " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("save_instance: write failed for " + path);
  }
}

}  // namespace sampdes
