#include "sparse/constrained.hpp"

#include <algorithm>
#include <cmath>

#include "sparse/error.hpp"
#include "sparse/proximal.hpp"

namespace sparse {

namespace {

constexpr double kTiny = 1e-300;

double half_sq(const Vector& r) { return 0.5 * r.squaredNorm(); }

}  // namespace

SparseSolution gpsr_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double lam = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const Index n = x.cols();
  const double beta = config.param("beta", 0.1);
  const double gamma = config.param("gamma", 0.5);
  const double smin = config.param("sigma_min", 1e-30);
  const double smax = config.param("sigma_max", 1e30);

  // z = [u; v], alpha = u - v
  Vector u = Vector::Zero(n), v = Vector::Zero(n);
  Vector alpha = Vector::Zero(n);
  const Vector xty = x.transpose() * y;
  auto objective = [&](const Vector& uu, const Vector& vv, const Vector& a) {
    return half_sq(y - x * a) + lam * (uu.sum() + vv.sum());
  };
  double f = objective(u, v, alpha);
  std::vector<double> trace{f};
  std::size_t it = 0;
  bool conv = false;

  Vector ga = x.transpose() * (x * alpha) - xty;
  while (it < config.max_iterations) {
    Vector gu = (lam + ga.array()).matrix();
    Vector gv = (lam - ga.array()).matrix();

    // natural residual of the complementarity problem
    double nat = 0.0;
    for (Index i = 0; i < n; ++i)
      nat = std::max({nat, std::abs(std::min(u[i], gu[i])), std::abs(std::min(v[i], gv[i]))});
    if (nat <= config.tolerance * lam) {
      conv = true;
      break;
    }

    Vector pu = gu, pv = gv;
    for (Index i = 0; i < n; ++i) {
      if (!(u[i] > 0.0 || gu[i] < 0.0)) pu[i] = 0.0;
      if (!(v[i] > 0.0 || gv[i] < 0.0)) pv[i] = 0.0;
    }
    const double num = pu.squaredNorm() + pv.squaredNorm();
    const double den = (x * (pu - pv)).squaredNorm();
    double sigma = den > 0.0 ? num / den : smax;
    sigma = std::clamp(sigma, smin, smax);

    Vector nu, nv, na;
    double fn = f;
    for (int bt = 0; bt < 200; ++bt) {
      nu = (u - sigma * gu).cwiseMax(0.0);
      nv = (v - sigma * gv).cwiseMax(0.0);
      na = nu - nv;
      fn = objective(nu, nv, na);
      const double decrease = gu.dot(u - nu) + gv.dot(v - nv);
      if (fn <= f - beta * decrease) break;
      sigma *= gamma;
    }
    u = std::move(nu);
    v = std::move(nv);
    alpha = std::move(na);
    f = fn;
    ga = x.transpose() * (x * alpha) - xty;
    trace.push_back(f);
    ++it;
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution tnipm_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double lam = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const Index n = x.cols();
  const std::size_t cg_max = std::size_t(config.param("cg_iterations", 200));
  const double zeta_beta = config.param("zeta_beta", 0.5);
  const double ls_alpha = 0.01, ls_beta = 0.5;

  Vector alpha = Vector::Zero(n);
  Vector u = Vector::Ones(n);
  double t = 1.0 / lam;
  const Vector xtx_diag = x.colwise().squaredNorm().transpose();
  std::vector<double> trace, gaps;
  std::size_t it = 0;
  bool conv = false;
  unsigned flags = 0;

  auto barrier_obj = [&](const Vector& a, const Vector& uu, double tt, bool& feasible) {
    feasible = true;
    double logs = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double p = uu[i] + a[i], q = uu[i] - a[i];
      if (p <= 0.0 || q <= 0.0) {
        feasible = false;
        return 0.0;
      }
      logs += std::log(p) + std::log(q);
    }
    return tt * (half_sq(x * a - y) + lam * uu.sum()) - logs;
  };

  while (it < config.max_iterations) {
    const Vector r = x * alpha - y;
    const Vector c = x.transpose() * r;
    // dual point: scale the residual into the feasible set, zero denominators skipped
    double s = 1.0;
    for (Index i = 0; i < n; ++i)
      if (c[i] != 0.0) s = std::min(s, lam / std::abs(c[i]));
    const Vector nu = s * r;
    const double primal = half_sq(r) + lam * alpha.lpNorm<1>();
    const double dual = -half_sq(nu) - nu.dot(y);
    const double gap = std::max(primal - dual, 0.0);
    gaps.push_back(gap);
    trace.push_back(primal);
    if (gap <= config.tolerance * std::max(std::abs(dual), kTiny) || gap == 0.0) {
      conv = true;
      break;
    }

    const Vector q1 = (u + alpha).cwiseInverse();
    const Vector q2 = (u - alpha).cwiseInverse();
    const Vector g_a = t * c - q1 + q2;
    const Vector g_u = (t * lam - q1.array() - q2.array()).matrix();
    const Vector d1 = q1.cwiseAbs2() + q2.cwiseAbs2();
    const Vector d2 = q1.cwiseAbs2() - q2.cwiseAbs2();

    auto hess = [&](const Vector& pa, const Vector& pu, Vector& ha, Vector& hu) {
      ha = t * (x.transpose() * (x * pa)) + d1.cwiseProduct(pa) + d2.cwiseProduct(pu);
      hu = d2.cwiseProduct(pa) + d1.cwiseProduct(pu);
    };
    // 2x2 block preconditioner per coordinate
    const Vector p11 = t * xtx_diag + d1;
    const Vector det = p11.cwiseProduct(d1) - d2.cwiseAbs2();
    auto precond = [&](const Vector& ra, const Vector& ru, Vector& za, Vector& zu) {
      za = (d1.cwiseProduct(ra) - d2.cwiseProduct(ru)).cwiseQuotient(det);
      zu = (p11.cwiseProduct(ru) - d2.cwiseProduct(ra)).cwiseQuotient(det);
    };

    const double gnorm = std::sqrt(g_a.squaredNorm() + g_u.squaredNorm());
    const double zeta = std::min(0.1, zeta_beta * gap / std::max(gnorm, kTiny));

    // PCG on H d = -g
    Vector da = Vector::Zero(n), du = Vector::Zero(n);
    Vector ra = -g_a, ru = -g_u;
    Vector za, zu, ha, hu;
    precond(ra, ru, za, zu);
    Vector pa = za, pu = zu;
    double rz = ra.dot(za) + ru.dot(zu);
    bool breakdown = false;
    for (std::size_t k = 0; k < cg_max; ++k) {
      hess(pa, pu, ha, hu);
      const double php = pa.dot(ha) + pu.dot(hu);
      if (!(php > 0.0) || !std::isfinite(php)) {
        breakdown = true;
        break;
      }
      const double step = rz / php;
      da += step * pa;
      du += step * pu;
      ra -= step * ha;
      ru -= step * hu;
      if (std::sqrt(ra.squaredNorm() + ru.squaredNorm()) <= zeta * gnorm) break;
      precond(ra, ru, za, zu);
      const double rz_new = ra.dot(za) + ru.dot(zu);
      const double b = rz_new / rz;
      rz = rz_new;
      pa = za + b * pa;
      pu = zu + b * pu;
    }
    if (breakdown || !da.allFinite() || !du.allFinite()) {
      da = -g_a;
      du = -g_u;
      flags |= kCgBreakdown;
    }

    bool feas = false;
    const double phi = barrier_obj(alpha, u, t, feas);
    const double slope = g_a.dot(da) + g_u.dot(du);
    double step = 1.0;
    Vector na, nu_;
    for (int k = 0; k < 100; ++k) {
      na = alpha + step * da;
      nu_ = u + step * du;
      const double phin = barrier_obj(na, nu_, t, feas);
      if (feas && phin <= phi + ls_alpha * step * slope) break;
      step *= ls_beta;
    }
    if (feas) {
      alpha = std::move(na);
      u = std::move(nu_);
    }
    t *= 2.0;
    ++it;
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.gap_trace = std::move(gaps);
  sol.iterations = it;
  sol.converged = conv;
  sol.flags = flags;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

SparseSolution adm_solve(const SparseProblem& problem, const SolverConfig& config) {
  config.validate();
  const double tau_fid = problem.lambda();
  const Matrix& x = problem.x();
  const Vector& y = problem.y();
  const double ynorm = y.norm();
  const double rho = config.param("rho_grow", 1.01);
  const double tau_p = 1.0 / std::max(problem.dict().lipschitz(), kTiny);
  // geometric growth without a ceiling freezes the iterates before optimality
  double mu = config.param("mu0", 0.1 / tau_fid);
  const double mu_max = config.param("mu_max", 1.0 / tau_fid);

  Vector alpha = Vector::Zero(x.cols());
  Vector s = Vector::Zero(y.size());
  Vector mult = Vector::Zero(y.size());
  std::vector<double> trace;
  std::size_t it = 0;
  bool conv = false;
  while (it < config.max_iterations) {
    const Vector xa = x * alpha;
    s = (tau_fid / (1.0 + mu * tau_fid)) * (mult + mu * (y - xa));
    const Vector g = x.transpose() * (s + xa - y - mult / mu);
    Vector next = soft_threshold(alpha - tau_p * g, tau_p / mu);
    const double change = (next - alpha).norm();
    alpha = std::move(next);
    const Vector feas = s + x * alpha - y;
    mult -= mu * feas;
    mu = std::min(rho * mu, mu_max);
    ++it;
    trace.push_back(0.5 * (y - x * alpha).squaredNorm() + tau_fid * alpha.lpNorm<1>());
    if (feas.norm() <= config.tolerance * ynorm &&
        change <= config.tolerance * std::max(alpha.norm(), kTiny)) {
      conv = true;
      break;
    }
  }
  SparseSolution sol = make_solution(problem, std::move(alpha));
  sol.objective_trace = std::move(trace);
  sol.iterations = it;
  sol.converged = conv;
  if (!conv) sol.flags |= kBudgetExceeded;
  return sol;
}

}  // namespace sparse
