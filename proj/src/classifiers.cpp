#include "sparse/classifiers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sparse/constrained.hpp"
#include "sparse/error.hpp"
#include "sparse/greedy.hpp"
#include "sparse/homotopy.hpp"
#include "sparse/proximal.hpp"

namespace sparse {

LabeledDataset::LabeledDataset(Matrix x, std::vector<int> l) : samples(std::move(x)), labels(std::move(l)) {
  for (int v : labels) num_classes = std::max(num_classes, v + 1);
  validate();
}

LabeledDataset::LabeledDataset(Matrix x, std::vector<int> l, int classes)
    : samples(std::move(x)), labels(std::move(l)), num_classes(classes) {
  validate();
}

void LabeledDataset::validate() const {
  if (Index(labels.size()) != samples.cols()) throw InvalidArgument("dataset: label count mismatch");
  std::vector<char> seen(std::max(num_classes, 0), 0);
  for (int v : labels) {
    if (v < 0 || v >= num_classes) throw InvalidArgument("dataset: label out of range");
    seen[v] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InvalidArgument("dataset: empty class");
}

LabeledDataset LabeledDataset::subset(const std::vector<Index>& idx) const {
  LabeledDataset out;
  out.samples.resize(samples.rows(), Index(idx.size()));
  out.labels.resize(idx.size());
  out.num_classes = num_classes;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.samples.col(Index(j)) = samples.col(idx[j]);
    out.labels[j] = labels[idx[j]];
  }
  return out;
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {
      "mp",   "omp",  "gpsr",           "l1ls",          "adm",
      "ista", "fista", "sparsa",        "half",          "palm",
      "dalm", "lasso-homotopy", "bpdn-homotopy", "reweighted-homotopy", "tptsr"};
  return names;
}

bool known_solver(const std::string& name) {
  const auto& n = solver_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

SrcModel::SrcModel(const LabeledDataset& train) : labels_(train.labels) {
  train.validate();
  if (train.size() == 0) throw InvalidArgument("src: empty training set");
  dict_ = normalize_columns(train.samples);
  members_.resize(train.num_classes);
  for (Index i = 0; i < train.size(); ++i) members_[labels_[i]].push_back(i);
}

Vector SrcModel::class_residuals(const Vector& y, const Vector& alpha) const {
  const Matrix& x = dict_.atoms();
  Vector r(num_classes());
  for (int c = 0; c < num_classes(); ++c) {
    Vector rec = Vector::Zero(y.size());
    for (Index i : members_[c])
      if (alpha[i] != 0.0) rec.noalias() += alpha[i] * x.col(i);
    r[c] = (y - rec).squaredNorm();
  }
  return r;
}

namespace {

int argmin_label(const Vector& r) {
  Index best = 0;
  for (Index i = 1; i < r.size(); ++i)
    if (r[i] < r[best]) best = i;
  return int(best);
}

}  // namespace

SparseSolution solve_named(const std::string& solver, const Dictionary& dict, const Vector& y,
                           double lambda, const SolverConfig& config) {
  if (!(lambda > 0.0)) throw InvalidArgument("solver parameter must be positive");
  auto lag = [&] { return SparseProblem(dict, y, Lagrangian{lambda}); };
  if (solver == "mp") return mp_solve(SparseProblem(dict, y, ResidualBound{lambda * y.norm()}), config);
  if (solver == "omp") return omp_solve(SparseProblem(dict, y, ResidualBound{lambda * y.norm()}), config);
  if (solver == "gpsr") return gpsr_solve(lag(), config);
  if (solver == "l1ls") return tnipm_solve(lag(), config);
  if (solver == "adm") return adm_solve(lag(), config);
  if (solver == "ista") return ista_solve(lag(), config);
  if (solver == "fista") return fista_solve(lag(), config);
  if (solver == "sparsa") return sparsa_solve(lag(), config);
  if (solver == "half") {
    const Index n = dict.cols();
    const Index k = std::clamp(Index(std::ceil(lambda * double(n))), Index(1), n);
    return half_proximal_solve(lag(), config, k);
  }
  if (solver == "palm") return palm_solve(SparseProblem(dict, y, Interpolating{}), config);
  if (solver == "dalm") return dalm_solve(SparseProblem(dict, y, Interpolating{}), config);
  if (solver == "lasso-homotopy") return lasso_homotopy(lag(), config).first;
  if (solver == "bpdn-homotopy") return bpdn_homotopy(lag(), config);
  if (solver == "reweighted-homotopy")
    return reweighted_homotopy(lag(), Vector::Constant(dict.cols(), lambda), config);
  throw InvalidArgument("unknown solver: " + solver);
}

ClassResult src_classify(const SrcModel& model, const Vector& y, const std::string& solver,
                         double lambda_or_eps, const SolverConfig& config) {
  if (y.size() != model.dict().rows()) throw InvalidArgument("src: dimension mismatch");
  const SparseSolution sol = solve_named(solver, model.dict(), y, lambda_or_eps, config);
  ClassResult out;
  out.residuals = model.class_residuals(y, sol.alpha);
  out.label = argmin_label(out.residuals);
  out.flags = sol.flags;
  return out;
}

ClassResult src_classify(const LabeledDataset& train, const Vector& y, const std::string& solver,
                         double lambda_or_eps, const SolverConfig& config) {
  return src_classify(SrcModel(train), y, solver, lambda_or_eps, config);
}

ClassResult tptsr_classify(const SrcModel& model, const Vector& y, double mu, Index m_keep) {
  const Matrix& x = model.dict().atoms();
  const Index n = x.cols();
  if (y.size() != x.rows()) throw InvalidArgument("tptsr: dimension mismatch");
  if (!(mu > 0.0)) throw InvalidArgument("tptsr: mu must be positive");
  if (m_keep == 0) m_keep = std::max<Index>(model.num_classes(), Index(std::ceil(0.1 * double(n))));
  if (m_keep < 1 || m_keep > n) throw InvalidArgument("tptsr: m_keep must lie in [1, N]");

  const Vector a1 = ridge_least_squares(x, y, mu);
  std::vector<double> e(n);
  for (Index i = 0; i < n; ++i) e[i] = (y - a1[i] * x.col(i)).squaredNorm();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return e[a] < e[b]; });
  order.resize(m_keep);
  std::sort(order.begin(), order.end());

  Matrix xk(x.rows(), m_keep);
  for (Index j = 0; j < m_keep; ++j) xk.col(j) = x.col(order[j]);
  const Vector a2 = ridge_least_squares(xk, y, mu);

  ClassResult out;
  const int c = model.num_classes();
  std::vector<Vector> rec(c, Vector::Zero(y.size()));
  std::vector<char> present(c, 0);
  for (Index j = 0; j < m_keep; ++j) {
    const int l = model.labels()[order[j]];
    rec[l].noalias() += a2[j] * xk.col(j);
    present[l] = 1;
  }
  out.residuals.resize(c);
  for (int k = 0; k < c; ++k) out.residuals[k] = present[k] ? (y - rec[k]).squaredNorm() : y.squaredNorm();
  out.label = argmin_label(out.residuals);
  return out;
}

ClassResult tptsr_classify(const LabeledDataset& train, const Vector& y, double mu, Index m_keep) {
  return tptsr_classify(SrcModel(train), y, mu, m_keep);
}

ClassResult classify(const SrcModel& model, const Vector& y, const MethodSpec& method) {
  if (method.solver == "tptsr") return tptsr_classify(model, y, method.lambda, method.tptsr_keep);
  return src_classify(model, y, method.solver, method.lambda, method.config);
}

namespace {

SplitResult run_split(const LabeledDataset& train, const LabeledDataset& test, const MethodSpec& method,
                      bool parallel) {
  if (test.size() == 0) throw InvalidArgument("evaluate_split: empty test set");
  if (train.dim() != test.dim()) throw InvalidArgument("evaluate_split: dimension mismatch");
  if (!known_solver(method.solver)) throw InvalidArgument("unknown solver: " + method.solver);
  const SrcModel model(train);
  model.dict().lipschitz();  // fill the cache before the threads share it
  const Index m = test.size();
  std::vector<int> pred(m, -1);
  std::vector<double> secs(m, 0.0);
  unsigned flags = 0;
  auto one = [&](Index i, unsigned& f) {
    Vector y = test.samples.col(i);
    const double nrm = y.norm();
    if (nrm > 0.0) y /= nrm;
    const auto t0 = std::chrono::steady_clock::now();
    const ClassResult r = classify(model, y, method);
    secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    pred[i] = r.label;
    f |= r.flags;
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic) reduction(| : flags)
    for (Index i = 0; i < m; ++i) one(i, flags);
  } else {
    for (Index i = 0; i < m; ++i) one(i, flags);
  }
  SplitResult out;
  Index correct = 0;
  double total = 0.0;
  for (Index i = 0; i < m; ++i) {
    correct += pred[i] == test.labels[i];
    total += secs[i];
  }
  out.accuracy = double(correct) / double(m);
  out.per_sample_time = total / double(m);
  out.predictions = std::move(pred);
  out.flags = flags;
  return out;
}

}  // namespace

SplitResult evaluate_split(const LabeledDataset& train, const LabeledDataset& test, const MethodSpec& method) {
  return run_split(train, test, method, true);
}

SplitResult evaluate_split_serial(const LabeledDataset& train, const LabeledDataset& test,
                                  const MethodSpec& method) {
  return run_split(train, test, method, false);
}

}  // namespace sparse
