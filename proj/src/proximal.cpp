#include "sparse/proximal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sparse/error.hpp"

namespace sparse {

namespace {

constexpr double kTiny = 1e-300;

double l1_objective(const Matrix& x, const Vector& y, const Vector& a, double lam) {
  return 0.5 * (y - x * a).squaredNorm() + lam * a.lpNorm<1>();
}

bool small_change(const Vector& next, const Vector& prev, double tol) {
  return (next - prev).norm() <= tol * std::max(next.norm(), kTiny);
}

struct FistaRun {
  std::size_t iters = 0;
  bool converged = false;
};

// FISTA on 0.5||y - Xa||^2 + lam ||a||_1 starting from alpha (warm start)
FistaRun fista_core(const Matrix& x, const Vector& y, double lam, double lip, Vector& alpha,
                    std::size_t max_it, double tol, std::vector<double>* trace) {
  FistaRun run;
  if (lip <= 0.0) {
    alpha.setZero();
    run.converged = true;
    return run;
  }
  ProximalState st;
  st.alpha = alpha;
  st.momentum_alpha = alpha;
  st.step_tau = 1.0 / lip;
  st.lambda_current = lam;
  const Vector xty = x.transpose() * y;
  for (std::size_t it = 0; it < max_it; ++it) {
    const Vector grad = x.transpose() * (x * st.momentum_alpha) - xty;
    Vector next = soft_threshold(st.momentum_alpha - st.step_tau * grad, lam * st.step_tau);
    const double mu_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * st.mu_seq * st.mu_seq));
    st.momentum_alpha = next + ((st.mu_seq - 1.0) / mu_next) * (next - st.alpha);
    st.mu_seq = mu_next;
    const bool done = small_change(next, st.alpha, tol);
    st.alpha = std::move(next);
    ++run.iters;
    if (trace) trace->push_back(l1_objective(x, y, st.alpha, lam));
    if (done) {
      run.converged = true;
      break;
    }
  }
  alpha = st.alpha;
  return run;
}

double half_f(double x, double lt) {
  double arg = (lt / 8.0) * std::pow(std::abs(x) / 3.0, -1.5);
  arg = std::clamp(arg, -1.0, 1.0);
  const double g = std::acos(arg);
  return (2.0 / 3.0) * x * (1.0 + std::cos(2.0 * std::numbers::pi / 3.0 - (2.0 / 3.0) * g));
}

}  // namespace

Vector soft_threshold(const Vector& s, double lambda) {
  if (lambda < 0.0) throw InvalidArgument("soft_threshold: lambda must be nonnegative");
  Vector out(s.size());
  for (Index j = 0; j < s.size(); ++j) {
    const double m = std::abs(s[j]) - lambda;
    out[j] = m > 0.0 ? std::copysign(m, s[j]) : 0.0;
  }
  return out;
}

double half_threshold_level(double lambda, double tau) {
  return std::cbrt(54.0) / 4.0 * std::pow(lambda * tau, 2.0 / 3.0);
}

Vector half_threshold(const Vector& x, double lambda, double tau) {
  if (!(lambda > 0.0 && tau > 0.0)) throw InvalidArgument("half_threshold: lambda and tau must be positive");
  const double lt = lambda * tau;
  const double cut = half_threshold_level(lambda, tau);
  Vector out = Vector::Zero(x.size());
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > cut) out[i] = half_f(x[i], lt);
  return out;
}

SparseSolution ista_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double lam = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const double lip = problem.dict().lipschitz();
  Vector alpha = Vector::Zero(x.cols());
  std::vector<double> trace{l1_objective(x, y, alpha, lam)};
  bool conv = lip <= 0.0;
  std::size_t it = 0;
  if (!conv) {
    const double tau = config.param("tau", 1.0 / lip);
    const Vector xty = x.transpose() * y;
    while (it < config.max_iterations) {
      Vector next = soft_threshold(alpha - tau * (x.transpose() * (x * alpha) - xty), lam * tau);
      conv = small_change(next, alpha, config.tolerance);
      alpha = std::move(next);
      trace.push_back(l1_objective(x, y, alpha, lam));
      ++it;
      if (conv) break;
    }
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution fista_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double lam = problem.lambda();
  const Matrix& x = problem.x();
  Vector alpha = Vector::Zero(x.cols());
  std::vector<double> trace{l1_objective(x, problem.y(), alpha, lam)};
  const double lip = config.param("lipschitz_scale", 2.0) * problem.dict().lipschitz();
  FistaRun run = fista_core(x, problem.y(), lam, lip, alpha, config.max_iterations,
                            config.tolerance, &trace);
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = run.iters;
  sol.converged = run.converged;
  if (!run.converged) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution sparsa_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double lam = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const double gamma = config.param("gamma", 0.2);
  const double tau_min = 1e-30, tau_max = 1e30;
  const double sigma = 1e-5;  // sufficient-decrease constant for the acceptance test

  Vector alpha = Vector::Zero(x.cols());
  std::vector<double> trace{l1_objective(x, y, alpha, lam)};
  const Vector xty = x.transpose() * y;
  double inv_tau = std::clamp(problem.dict().lipschitz(), tau_min, tau_max);
  double lam_t = std::max(gamma * xty.lpNorm<Eigen::Infinity>(), lam);
  std::size_t it = 0;
  bool conv = false;

  while (it < config.max_iterations) {
    bool inner_done = false;
    while (it < config.max_iterations) {
      const Vector grad = x.transpose() * (x * alpha) - xty;
      const double f0 = l1_objective(x, y, alpha, lam_t);
      Vector cand;
      for (;;) {
        cand = soft_threshold(alpha - grad / inv_tau, lam_t / inv_tau);
        const double f1 = l1_objective(x, y, cand, lam_t);
        if (f1 <= f0 - 0.5 * sigma * inv_tau * (cand - alpha).squaredNorm() || inv_tau >= tau_max) break;
        inv_tau = std::min(2.0 * inv_tau, tau_max);
      }
      const Vector d = cand - alpha;
      const double dn = d.squaredNorm();
      if (dn > 0.0) inv_tau = std::clamp((x * d).squaredNorm() / dn, tau_min, tau_max);
      inner_done = small_change(cand, alpha, config.tolerance);
      alpha = std::move(cand);
      trace.push_back(l1_objective(x, y, alpha, lam));
      ++it;
      if (inner_done) break;
    }
    if (!inner_done) break;
    if (lam_t <= lam) {
      conv = true;
      break;
    }
    const Vector c = x.transpose() * (y - x * alpha);
    lam_t = std::max(gamma * c.lpNorm<Eigen::Infinity>(), lam);
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution half_proximal_solve(const SparseProblem& problem, const SolverConfig& config, Index k) {
  config.validate();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const Index n = x.cols();
  if (k < 1) throw InvalidArgument("half_proximal_solve: k must be >= 1");
  const double eps = config.param("epsilon", 0.01);
  const double lip = problem.dict().lipschitz();
  Vector alpha = Vector::Zero(n);
  std::vector<double> trace;
  std::size_t it = 0;
  bool conv = lip <= 0.0 || y.isZero(0.0);
  if (!conv) {
    const double tau = (1.0 - eps) / lip;
    const Vector xty = x.transpose() * y;
    std::vector<double> mags(n);
    while (it < config.max_iterations) {
      const Vector theta = alpha + tau * (xty - x.transpose() * (x * alpha));
      for (Index i = 0; i < n; ++i) mags[i] = std::abs(theta[i]);
      double kth = 0.0;
      if (k < n) {
        std::nth_element(mags.begin(), mags.begin() + k, mags.end(), std::greater<>());
        kth = mags[k];
      }
      const double lam_t = std::max(std::sqrt(96.0) / (9.0 * tau) * std::pow(kth, 1.5), 1e-12);
      Vector next = half_threshold(theta, lam_t, tau);
      conv = small_change(next, alpha, config.tolerance);
      alpha = std::move(next);
      trace.push_back((x * alpha - y).squaredNorm() + lam_t * alpha.cwiseAbs().cwiseSqrt().sum());
      ++it;
      if (conv) break;
    }
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution palm_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  if (!std::holds_alternative<Interpolating>(problem.constraint()))
    throw ConstraintMismatch("palm_solve needs an Interpolating constraint");
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const double ynorm = y.norm();
  Vector alpha = Vector::Zero(x.cols());
  std::vector<double> trace;
  std::size_t it = 0;
  bool conv = ynorm == 0.0;
  if (!conv) {
    const double cmax = (x.transpose() * y).lpNorm<Eigen::Infinity>();
    const double beta = config.param("beta", 10.0 / std::max(cmax, kTiny));
    const double lip = 2.0 * problem.dict().lipschitz();
    const auto inner_it = std::size_t(config.param("inner_iterations", 100));
    const double inner_tol = config.param("inner_tolerance", 1e-8);
    Vector z = Vector::Zero(y.size());
    while (it < config.max_iterations) {
      const Vector target = y + z / beta;
      fista_core(x, target, 1.0 / beta, lip, alpha, inner_it, inner_tol, nullptr);
      const Vector r = y - x * alpha;
      z += beta * r;
      ++it;
      trace.push_back(alpha.lpNorm<1>());
      if (r.norm() <= config.tolerance * ynorm) {
        conv = true;
        break;
      }
    }
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution dalm_solve(const SparseProblem& problem, const SolverConfig& config, DalmTrace* dtrace) {
  config.validate();
  if (!std::holds_alternative<Interpolating>(problem.constraint()))
    throw ConstraintMismatch("dalm_solve needs an Interpolating constraint");
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const double ynorm = y.norm();
  const Matrix xxt = x * x.transpose();
  Eigen::LLT<Matrix> llt(xxt);
  if (llt.info() != Eigen::Success) throw SingularSystem("dalm_solve: X X^T is singular");
  {
    const Vector diag = Matrix(llt.matrixL()).diagonal();
    if (diag.minCoeff() <= 1e-8 * diag.maxCoeff()) throw SingularSystem("dalm_solve: X X^T is singular");
  }
  const double eps = config.param("epsilon", 0.01);
  const double tau = config.param("tau", (1.0 - eps) / problem.dict().lipschitz());

  Vector lam = Vector::Zero(y.size());
  Vector mu = Vector::Zero(x.cols());
  Vector z(x.cols());
  std::vector<double> trace;
  std::size_t it = 0;
  bool conv = false;
  while (it < config.max_iterations) {
    z = (x.transpose() * lam + mu / tau).cwiseMax(-1.0).cwiseMin(1.0);
    if (dtrace) dtrace->max_z_abs = std::max(dtrace->max_z_abs, z.lpNorm<Eigen::Infinity>());
    lam = llt.solve(x * z + (y - x * mu) / tau);
    Vector next = mu - tau * (z - x.transpose() * lam);
    const bool still = small_change(next, mu, config.tolerance);
    mu = std::move(next);
    ++it;
    trace.push_back(mu.lpNorm<1>());
    if (still && (y - x * mu).norm() <= config.tolerance * ynorm) {
      conv = true;
      break;
    }
  }
  SparseSolution sol = make_solution(problem, std::move(mu));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

}  // namespace sparse
