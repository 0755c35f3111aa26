#include "sparse/problem.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "sparse/error.hpp"

namespace sparse {

struct Dictionary::Cache {
  std::once_flag once;
  double lipschitz = 0.0;
};

Dictionary::Dictionary(Matrix atoms, bool normalized)
    : atoms_(std::make_shared<const Matrix>(std::move(atoms))),
      cache_(std::make_shared<Cache>()),
      normalized_(normalized) {
  if (atoms_->rows() < 1 || atoms_->cols() < 1) throw InvalidArgument("dictionary: empty matrix");
  if (!atoms_->allFinite()) throw InvalidArgument("dictionary: non-finite entries");
  if (normalized_) {
    for (Index j = 0; j < atoms_->cols(); ++j)
      if (std::abs(atoms_->col(j).norm() - 1.0) > 1e-10)
        throw InvalidArgument("dictionary: column " + std::to_string(j) + " is not unit norm");
  }
}

double Dictionary::lipschitz() const {
  if (!cache_) return 0.0;
  std::call_once(cache_->once, [this] { cache_->lipschitz = spectral_norm_sq(*atoms_); });
  return cache_->lipschitz;
}

Dictionary normalize_columns(const Matrix& atoms) {
  Matrix out = atoms;
  for (Index j = 0; j < out.cols(); ++j) {
    const double n = out.col(j).norm();
    if (n == 0.0) throw InvalidArgument("normalize_columns: zero column " + std::to_string(j));
    out.col(j) /= n;
  }
  return Dictionary(std::move(out), true);
}

Dictionary normalize_columns(const Dictionary& dict) { return normalize_columns(dict.atoms()); }

SparseProblem::SparseProblem(Dictionary dict, Vector probe, Constraint constraint)
    : dict_(std::move(dict)), probe_(std::move(probe)), constraint_(constraint) {
  if (dict_.cols() == 0) throw InvalidArgument("problem: empty dictionary");
  if (probe_.size() != dict_.rows()) throw InvalidArgument("problem: probe length does not match dictionary rows");
  if (!probe_.allFinite()) throw InvalidArgument("problem: non-finite probe");
  if (auto* s = std::get_if<Sparsity>(&constraint_)) {
    if (s->k < 1 || s->k > dict_.cols()) throw InvalidArgument("problem: sparsity must lie in [1, n]");
  } else if (auto* l = std::get_if<Lagrangian>(&constraint_)) {
    if (!(l->lambda > 0.0)) throw InvalidArgument("problem: lambda must be positive");
  } else if (auto* e = std::get_if<ResidualBound>(&constraint_)) {
    if (!(e->epsilon > 0.0)) throw InvalidArgument("problem: epsilon must be positive");
  }
}

double SparseProblem::lambda() const {
  if (auto* l = std::get_if<Lagrangian>(&constraint_)) return l->lambda;
  throw ConstraintMismatch("expected a Lagrangian constraint");
}

double SolverConfig::param(const std::string& name, double fallback) const {
  auto it = step_overrides.find(name);
  return it == step_overrides.end() ? fallback : it->second;
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("config: max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidArgument("config: tolerance must be positive");
}

void refresh_solution(const SparseProblem& problem, SparseSolution& sol) {
  const double t = l0_tolerance(sol.alpha);
  sol.support.clear();
  sol.signs.clear();
  for (Index i = 0; i < sol.alpha.size(); ++i) {
    if (std::abs(sol.alpha[i]) > t) {
      sol.support.push_back(i);
      sol.signs.push_back(sol.alpha[i] > 0 ? 1 : -1);
    }
  }
  sol.residual_norm = (problem.y() - problem.x() * sol.alpha).norm();
}

SparseSolution make_solution(const SparseProblem& problem, Vector alpha) {
  SparseSolution sol;
  sol.alpha = std::move(alpha);
  refresh_solution(problem, sol);
  return sol;
}

double lasso_objective(const SparseProblem& problem, const Vector& alpha) {
  const double lam = problem.lambda();
  return 0.5 * (problem.y() - problem.x() * alpha).squaredNorm() + lam * alpha.lpNorm<1>();
}

bool check_weighted_optimality(const Matrix& x, const Vector& y, const Vector& alpha,
                               const Vector& weights, double tol) {
  const Vector c = x.transpose() * (y - x * alpha);
  // coefficients tiny relative to the largest are judged by the off-support bound
  const double amax = alpha.size() ? alpha.cwiseAbs().maxCoeff() : 0.0;
  const double cut = std::max(l0_tolerance(alpha), tol * amax);
  for (Index i = 0; i < alpha.size(); ++i) {
    const double w = weights[i];
    if (std::abs(alpha[i]) > cut) {
      const double target = alpha[i] > 0 ? w : -w;
      if (std::abs(c[i] - target) > tol * w) return false;
    } else if (std::abs(c[i]) > w * (1.0 + tol)) {
      return false;
    }
  }
  return true;
}

bool check_optimality_l1(const SparseProblem& problem, const Vector& alpha, double tol) {
  const double lam = problem.lambda();
  return check_weighted_optimality(problem.x(), problem.y(), alpha,
                                   Vector::Constant(alpha.size(), lam), tol);
}

}  // namespace sparse
