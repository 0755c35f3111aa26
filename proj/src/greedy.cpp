#include "sparse/greedy.hpp"

#include <algorithm>
#include <cmath>

#include "sparse/error.hpp"

namespace sparse {

namespace {

struct Stop {
  Index max_atoms;
  double eps;
  bool bounded;  // residual bound decides convergence
};

Stop stop_rule(const SparseProblem& p, const SolverConfig& cfg, Index cap) {
  const double floor = cfg.tolerance * p.y().norm();
  if (auto* s = std::get_if<Sparsity>(&p.constraint())) return {s->k, floor, false};
  if (auto* e = std::get_if<ResidualBound>(&p.constraint()))
    return {std::min<Index>(cap, Index(cfg.max_iterations)), e->epsilon, true};
  throw ConstraintMismatch("greedy solvers need a Sparsity or ResidualBound constraint");
}

struct OmpRun {
  Vector alpha;
  std::vector<double> trace;
  std::size_t iters = 0;
  unsigned flags = 0;
};

Index argmax_abs(const Vector& c, const std::vector<char>* skip) {
  Index best = -1;
  double bv = -1.0;
  for (Index j = 0; j < c.size(); ++j) {
    if (skip && (*skip)[j]) continue;
    const double v = std::abs(c[j]);
    if (v > bv) {
      bv = v;
      best = j;
    }
  }
  return best;
}

OmpRun omp_core(const Matrix& x, const Vector& y, Index max_atoms, double eps) {
  const Index n = x.cols();
  max_atoms = std::min(max_atoms, n);
  OmpRun run;
  run.alpha = Vector::Zero(n);
  Vector r = y;
  double rn = r.norm();
  run.trace.push_back(rn);
  if (max_atoms <= 0) return run;

  Matrix l = Matrix::Zero(max_atoms, max_atoms);
  Vector b(max_atoms);
  std::vector<Index> sel;
  std::vector<char> used(n, 0);
  const double scale = y.norm() * std::max(x.colwise().norm().maxCoeff(), 1.0);
  Vector a;

  while (Index(sel.size()) < max_atoms && rn > eps) {
    const Vector c = x.transpose() * r;
    const Index j = argmax_abs(c, &used);
    if (j < 0 || std::abs(c[j]) <= 1e-14 * scale) break;
    const Index t = Index(sel.size());
    const double gjj = x.col(j).squaredNorm();
    double d2 = gjj;
    if (t > 0) {
      Vector g(t);
      for (Index i = 0; i < t; ++i) g[i] = x.col(sel[i]).dot(x.col(j));
      const Vector w = l.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(g);
      l.row(t).head(t) = w.transpose();
      d2 -= w.squaredNorm();
    }
    if (d2 <= 1e-12 * gjj) {
      d2 = std::max(d2, 0.0) + 1e-12;
      run.flags |= kRidgeFallback;
    }
    l(t, t) = std::sqrt(d2);
    sel.push_back(j);
    used[j] = 1;
    b[t] = x.col(j).dot(y);

    const Index s = t + 1;
    const auto lt = l.topLeftCorner(s, s).triangularView<Eigen::Lower>();
    a = lt.solve(b.head(s));
    a = lt.transpose().solve(a);
    r = y;
    for (Index i = 0; i < s; ++i) r.noalias() -= a[i] * x.col(sel[i]);
    rn = r.norm();
    run.trace.push_back(rn);
    ++run.iters;
  }
  for (Index i = 0; i < Index(sel.size()); ++i) run.alpha[sel[i]] = a[i];
  return run;
}

}  // namespace

Vector omp_code(const Matrix& x, const Vector& y, Index max_atoms, double eps, unsigned* flags) {
  OmpRun run = omp_core(x, y, max_atoms, eps);
  if (flags) *flags |= run.flags;
  return std::move(run.alpha);
}

SparseSolution omp_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const Stop st = stop_rule(problem, config, std::min(problem.x().cols(), problem.x().rows()));
  OmpRun run = omp_core(problem.x(), problem.y(), st.max_atoms, st.eps);
  SparseSolution sol = make_solution(problem, std::move(run.alpha));
  sol.objective_trace = std::move(run.trace);
  sol.iterations = run.iters;
  sol.flags = run.flags;
  sol.converged = st.bounded ? sol.residual_norm <= st.eps : true;
  return sol;
}

SparseSolution mp_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const Matrix& x = problem.x();
  const Stop st = stop_rule(problem, config, Index(config.max_iterations));
  Vector alpha = Vector::Zero(x.cols());
  Vector r = problem.y();
  double rn = r.norm();
  std::vector<double> trace{rn};
  const Vector cn2 = x.colwise().squaredNorm().transpose();
  std::size_t it = 0;
  while (Index(it) < st.max_atoms && rn > st.eps) {
    const Vector c = x.transpose() * r;
    const Index j = argmax_abs(c, nullptr);
    if (c[j] == 0.0) break;
    const double a = c[j] / cn2[j];
    alpha[j] += a;
    r.noalias() -= a * x.col(j);
    rn = r.norm();
    trace.push_back(rn);
    ++it;
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = st.bounded ? rn <= st.eps : true;
  if (st.bounded && !sol.converged) sol.flags |= kBudgetExceeded;
  return sol;
}

}  // namespace sparse
