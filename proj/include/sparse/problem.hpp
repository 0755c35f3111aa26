#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sparse/linalg.hpp"

namespace sparse {

// Atoms are shared and immutable, so copies are cheap.
class Dictionary {
 public:
  Dictionary() = default;
  // normalized=true asserts unit columns (checked to 1e-10)
  explicit Dictionary(Matrix atoms, bool normalized = false);

  const Matrix& atoms() const { return *atoms_; }
  bool normalized() const { return normalized_; }
  Index rows() const { return atoms_ ? atoms_->rows() : 0; }
  Index cols() const { return atoms_ ? atoms_->cols() : 0; }

  // lambda_max(X^T X), computed once per dictionary
  double lipschitz() const;

 private:
  struct Cache;
  std::shared_ptr<const Matrix> atoms_;
  std::shared_ptr<Cache> cache_;
  bool normalized_ = false;
};

Dictionary normalize_columns(const Dictionary& dict);
Dictionary normalize_columns(const Matrix& atoms);

struct Sparsity {
  Index k;
};
struct Lagrangian {
  double lambda;
};
struct ResidualBound {
  double epsilon;
};
struct Interpolating {};

using Constraint = std::variant<Sparsity, Lagrangian, ResidualBound, Interpolating>;

class SparseProblem {
 public:
  SparseProblem(Dictionary dict, Vector probe, Constraint constraint);

  const Dictionary& dict() const { return dict_; }
  const Matrix& x() const { return dict_.atoms(); }
  const Vector& y() const { return probe_; }
  const Constraint& constraint() const { return constraint_; }

  // throws ConstraintMismatch unless Lagrangian
  double lambda() const;

 private:
  Dictionary dict_;
  Vector probe_;
  Constraint constraint_;
};

enum SolverFlag : unsigned {
  kRidgeFallback = 1u << 0,
  kCgBreakdown = 1u << 1,
  kBudgetExceeded = 1u << 2,
  kSkippedSamples = 1u << 3,
};

struct SparseSolution {
  Vector alpha;
  std::vector<Index> support;
  std::vector<int> signs;
  double residual_norm = 0.0;
  std::vector<double> objective_trace;
  std::vector<double> gap_trace;  // duality gap per iterate (interior point only)
  std::size_t iterations = 0;
  bool converged = false;
  unsigned flags = 0;
};

struct SolverConfig {
  std::size_t max_iterations = 1000;
  double tolerance = 1e-6;
  std::map<std::string, double> step_overrides;
  std::uint64_t seed = 0;

  double param(const std::string& name, double fallback) const;
  void validate() const;
};

// fills support, signs and residual from alpha
SparseSolution make_solution(const SparseProblem& problem, Vector alpha);
void refresh_solution(const SparseProblem& problem, SparseSolution& sol);

double lasso_objective(const SparseProblem& problem, const Vector& alpha);
bool check_optimality_l1(const SparseProblem& problem, const Vector& alpha, double tol);

// same certificate with per-coordinate weights w_i in place of lambda
bool check_weighted_optimality(const Matrix& x, const Vector& y, const Vector& alpha,
                               const Vector& weights, double tol);

}  // namespace sparse
