#include "sparse/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "sparse/error.hpp"

namespace sparse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// G_LL^{-1} rhs on the active set, ridge 1e-10 when the Gram is singular
Vector solve_active(const Matrix& x, const std::vector<Index>& act, const Vector& rhs,
                    unsigned& flags) {
  const Index k = Index(act.size());
  if (k == 0) return Vector();
  Matrix xa(x.rows(), k);
  for (Index j = 0; j < k; ++j) xa.col(j) = x.col(act[j]);
  Matrix g = xa.transpose() * xa;
  Eigen::LLT<Matrix> llt(g);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Vector d = Matrix(llt.matrixL()).diagonal();
    ok = d.minCoeff() > 1e-7 * d.maxCoeff();
  }
  if (!ok) {
    flags |= kRidgeFallback;
    g.diagonal().array() += 1e-10;
    return g.ldlt().solve(rhs);
  }
  return llt.solve(rhs);
}

Vector active_mat_vec(const Matrix& x, const std::vector<Index>& act, const Vector& d) {
  Vector v = Vector::Zero(x.rows());
  for (std::size_t j = 0; j < act.size(); ++j) v.noalias() += d[Index(j)] * x.col(act[j]);
  return v;
}

HomotopyPathPoint make_point(double lambda, const Vector& alpha, const std::vector<Index>& act,
                             const std::vector<int>& sgn, PathEvent ev, Index idx) {
  HomotopyPathPoint p;
  p.lambda = lambda;
  p.alpha = alpha;
  p.event = ev;
  p.index = idx;
  std::vector<std::pair<Index, int>> s;
  for (std::size_t j = 0; j < act.size(); ++j) s.emplace_back(act[j], sgn[j]);
  std::sort(s.begin(), s.end());
  for (auto& [i, g] : s) {
    p.support.push_back(i);
    p.signs.push_back(g);
  }
  return p;
}

void erase_at(std::vector<Index>& act, std::vector<int>& sgn, std::size_t pos) {
  act.erase(act.begin() + std::ptrdiff_t(pos));
  sgn.erase(sgn.begin() + std::ptrdiff_t(pos));
}

double weighted_objective(const Matrix& x, const Vector& y, const Vector& a, const Vector& w) {
  return 0.5 * (y - x * a).squaredNorm() + w.cwiseProduct(a.cwiseAbs()).sum();
}

}  // namespace

std::pair<SparseSolution, HomotopyPath> weighted_lasso_homotopy(const SparseProblem& problem,
                                                                const Vector& w, double target,
                                                                const SolverConfig& config) {
  config.validate();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const Index n = x.cols();
  if (w.size() != n || (w.array() <= 0.0).any()) throw InvalidArgument("homotopy: weights must be positive");
  target = std::max(target, 0.0);

  Vector alpha = Vector::Zero(n);
  HomotopyPath path;
  unsigned flags = 0;
  std::size_t breaks = 0;
  std::vector<double> trace;

  Vector c = x.transpose() * y;
  Index j0 = 0;
  double lam = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double v = std::abs(c[i]) / w[i];
    if (v > lam) {
      lam = v;
      j0 = i;
    }
  }
  bool conv = true;
  if (lam > target && lam > 0.0) {
    conv = false;
    const double lam0 = lam;
    std::vector<Index> act{j0};
    std::vector<int> sgn{c[j0] > 0 ? 1 : -1};
    path.push_back(make_point(lam, alpha, act, sgn, PathEvent::kAtomAdded, j0));
    Index last_added = j0, last_removed = -1;
    const std::size_t budget = 4 * std::size_t(n);
    const double eps0 = 1e-12 * lam0;
    // below this correlation level the remaining segment is taken in one step
    const double floor = config.tolerance * lam0;

    while (breaks < budget) {
      c = x.transpose() * (y - x * alpha);
      Vector rhs(act.size());
      for (std::size_t j = 0; j < act.size(); ++j) rhs[Index(j)] = w[act[j]] * sgn[j];
      const Vector delta = solve_active(x, act, rhs, flags);
      const Vector a = x.transpose() * active_mat_vec(x, act, delta);

      std::vector<char> in(n, 0);
      for (Index i : act) in[i] = 1;
      double tau_add = kInf;
      Index add = -1;
      for (Index i = 0; i < n; ++i) {
        if (in[i]) continue;
        for (double t : {(lam * w[i] - c[i]) / (w[i] - a[i]), (lam * w[i] + c[i]) / (w[i] + a[i])}) {
          if (!(t > 0.0) || !std::isfinite(t)) continue;
          if (i == last_removed && t <= eps0) continue;
          if (t < tau_add) {
            tau_add = t;
            add = i;
          }
        }
      }
      double tau_rm = kInf;
      std::size_t rm = 0;
      for (std::size_t j = 0; j < act.size(); ++j) {
        const double d = delta[Index(j)];
        if (d == 0.0) continue;
        const double t = -alpha[act[j]] / d;
        if (!(t > 0.0)) continue;
        if (act[j] == last_added && t <= eps0) continue;
        if (t < tau_rm) {
          tau_rm = t;
          rm = j;
        }
      }

      const double remaining = lam - target;
      const double tau = std::min(tau_add, tau_rm);
      if (tau >= remaining || (target < floor && lam - tau <= floor)) {
        for (std::size_t j = 0; j < act.size(); ++j) alpha[act[j]] += remaining * delta[Index(j)];
        lam = target;
        conv = true;
        trace.push_back(weighted_objective(x, y, alpha, lam * w));
        path.push_back(make_point(lam, alpha, act, sgn, PathEvent::kTerminal, -1));
        break;
      }
      for (std::size_t j = 0; j < act.size(); ++j) alpha[act[j]] += tau * delta[Index(j)];
      lam -= tau;
      ++breaks;
      if (tau_rm <= tau_add) {
        const Index i = act[rm];
        alpha[i] = 0.0;
        erase_at(act, sgn, rm);
        last_removed = i;
        last_added = -1;
        path.push_back(make_point(lam, alpha, act, sgn, PathEvent::kAtomRemoved, i));
      } else {
        const double ci = c[add] - tau * a[add];
        act.push_back(add);
        sgn.push_back(ci > 0 ? 1 : -1);
        last_added = add;
        last_removed = -1;
        path.push_back(make_point(lam, alpha, act, sgn, PathEvent::kAtomAdded, add));
      }
      trace.push_back(weighted_objective(x, y, alpha, lam * w));
    }
  }

  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = breaks;
  sol.converged = conv;
  sol.flags = flags;
  if (!conv) sol.flags |= kBudgetExceeded;
  return {std::move(sol), std::move(path)};
}

std::pair<SparseSolution, HomotopyPath> lasso_homotopy(const SparseProblem& problem,
                                                       const SolverConfig& config) {
  double target = 0.0;
  if (auto* l = std::get_if<Lagrangian>(&problem.constraint()))
    target = l->lambda;
  else if (!std::holds_alternative<Interpolating>(problem.constraint()))
    throw ConstraintMismatch("lasso_homotopy needs an Interpolating or Lagrangian constraint");
  return weighted_lasso_homotopy(problem, Vector::Ones(problem.x().cols()), target, config);
}

SparseSolution bpdn_homotopy(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double target = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const Index n = x.cols();
  const Vector xty = x.transpose() * y;
  const double cmax = xty.lpNorm<Eigen::Infinity>();
  Vector alpha = Vector::Zero(n);
  std::vector<double> trace;
  unsigned flags = 0;
  std::size_t steps_done = 0;
  bool conv = true;

  if (target < cmax) {
    const auto steps = std::max<std::size_t>(1, std::size_t(config.param("steps", 500)));
    const double lam0 = cmax * (1.0 + 1e-9);
    const double step = (lam0 - target) / double(steps);
    std::vector<Index> act;
    std::vector<int> sgn;
    const std::size_t refresh_cap = 4 * std::size_t(n) + 8;
    for (std::size_t k = 1; k <= steps; ++k) {
      const double lam = k == steps ? target : lam0 - double(k) * step;
      bool consistent = false;
      for (std::size_t rr = 0; rr < refresh_cap; ++rr) {
        // closed form on the current support
        Vector rhs(act.size());
        for (std::size_t j = 0; j < act.size(); ++j) rhs[Index(j)] = xty[act[j]] - lam * sgn[j];
        const Vector sol = solve_active(x, act, rhs, flags);
        alpha.setZero();
        for (std::size_t j = 0; j < act.size(); ++j) alpha[act[j]] = sol[Index(j)];

        bool removed = false;
        for (std::size_t j = act.size(); j-- > 0;) {
          if (alpha[act[j]] * sgn[j] <= 0.0) {
            alpha[act[j]] = 0.0;
            erase_at(act, sgn, j);
            removed = true;
          }
        }
        if (removed) continue;

        const Vector c = xty - x.transpose() * (x * alpha);
        Index worst = -1;
        double wv = lam * (1.0 + 1e-12);
        std::vector<char> in(n, 0);
        for (Index i : act) in[i] = 1;
        for (Index i = 0; i < n; ++i) {
          if (in[i]) continue;
          if (std::abs(c[i]) > wv) {
            wv = std::abs(c[i]);
            worst = i;
          }
        }
        if (worst < 0) {
          consistent = true;
          break;
        }
        act.push_back(worst);
        sgn.push_back(c[worst] > 0 ? 1 : -1);
      }
      ++steps_done;
      trace.push_back(0.5 * (y - x * alpha).squaredNorm() + lam * alpha.lpNorm<1>());
      if (k == steps) conv = consistent;
    }
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = steps_done;
  sol.converged = conv;
  sol.flags = flags;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution reweighted_homotopy(const SparseProblem& problem, const Vector& weights,
                                   const SolverConfig& config, Vector* final_weights) {
  config.validate();
  const double lam = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const Index n = x.cols();
  const auto rounds = std::size_t(config.param("rounds", 4));
  const double sigma_w = config.param("sigma_w", 1e-2);

  auto [first, path0] = weighted_lasso_homotopy(problem, weights, 1.0, config);
  (void)path0;
  Vector alpha = first.alpha;
  unsigned flags = first.flags;
  std::size_t breaks = first.iterations;
  bool conv = first.converged;
  Vector w = weights;
  std::vector<double> trace{weighted_objective(x, y, alpha, w)};

  for (std::size_t round = 0; round < rounds && conv; ++round) {
    const Vector w_hat = (lam / (alpha.cwiseAbs().array() + sigma_w)).matrix();
    const Vector s = w_hat - w;
    std::vector<Index> act;
    std::vector<int> sgn;
    for (Index i = 0; i < n; ++i)
      if (alpha[i] != 0.0) {
        act.push_back(i);
        sgn.push_back(alpha[i] > 0 ? 1 : -1);
      }
    double sigma = 0.0;
    const std::size_t budget = 4 * std::size_t(n);
    std::size_t local = 0;
    bool done = false;
    Index last_added = -1, last_removed = -1;
    while (local < budget) {
      const Vector r = w + sigma * s;
      Vector rhs(act.size());
      for (std::size_t j = 0; j < act.size(); ++j) rhs[Index(j)] = -s[act[j]] * sgn[j];
      const Vector delta = solve_active(x, act, rhs, flags);
      const Vector p = x.transpose() * (x * alpha - y);
      const Vector q = x.transpose() * active_mat_vec(x, act, delta);
      std::vector<char> in(n, 0);
      for (Index i : act) in[i] = 1;

      double tau_add = kInf;
      Index add = -1;
      for (Index i = 0; i < n; ++i) {
        if (in[i]) continue;
        for (double t : {(r[i] - p[i]) / (q[i] - s[i]), (-r[i] - p[i]) / (q[i] + s[i])}) {
          if (!(t > 0.0) || !std::isfinite(t)) continue;
          if (i == last_removed && t <= 1e-12) continue;
          if (t < tau_add) {
            tau_add = t;
            add = i;
          }
        }
      }
      double tau_rm = kInf;
      std::size_t rm = 0;
      for (std::size_t j = 0; j < act.size(); ++j) {
        const double d = delta[Index(j)];
        if (d == 0.0) continue;
        const double t = -alpha[act[j]] / d;
        if (!(t > 0.0)) continue;
        if (act[j] == last_added && t <= 1e-12) continue;
        if (t < tau_rm) {
          tau_rm = t;
          rm = j;
        }
      }
      const double remaining = 1.0 - sigma;
      const double tau = std::min(tau_add, tau_rm);
      if (tau >= remaining) {
        for (std::size_t j = 0; j < act.size(); ++j) alpha[act[j]] += remaining * delta[Index(j)];
        done = true;
        break;
      }
      for (std::size_t j = 0; j < act.size(); ++j) alpha[act[j]] += tau * delta[Index(j)];
      sigma += tau;
      ++local;
      if (tau_rm <= tau_add) {
        const Index i = act[rm];
        alpha[i] = 0.0;
        erase_at(act, sgn, rm);
        last_removed = i;
        last_added = -1;
      } else {
        const double pi = p[add] + tau * q[add];
        act.push_back(add);
        sgn.push_back(pi > 0 ? -1 : 1);
        last_added = add;
        last_removed = -1;
      }
    }
    breaks += local;
    conv = done;
    w = w_hat;
    trace.push_back(weighted_objective(x, y, alpha, w));
  }

  if (final_weights) *final_weights = w;
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = breaks;
  sol.converged = conv;
  sol.flags = flags;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

void write_path_csv(std::ostream& out, const HomotopyPath& path) {
  out << "lambda,event,index,nnz\n";
  const auto old = out.precision(17);
  for (const auto& p : path) {
    const char* ev = p.event == PathEvent::kAtomAdded     ? "add"
                     : p.event == PathEvent::kAtomRemoved ? "remove"
                                                          : "terminal";
    out << p.lambda << ',' << ev << ',' << p.index << ',' << p.support.size() << '\n';
  }
  out.precision(old);
}

}  // namespace sparse
