#pragma once

#include <string>
#include <vector>

#include "sparse/problem.hpp"

namespace sparse {

struct LabeledDataset {
  Matrix samples;  // d x N, columns are samples
  std::vector<int> labels;
  int num_classes = 0;

  LabeledDataset() = default;
  // num_classes = max label + 1; throws unless every class is present
  LabeledDataset(Matrix x, std::vector<int> l);
  LabeledDataset(Matrix x, std::vector<int> l, int classes);

  Index size() const { return samples.cols(); }
  Index dim() const { return samples.rows(); }
  void validate() const;
  LabeledDataset subset(const std::vector<Index>& idx) const;
};

struct ClassResult {
  int label = -1;
  Vector residuals;  // squared l2, one per class
  unsigned flags = 0;
};

// every name the benchmark accepts, in CLI order
const std::vector<std::string>& solver_names();
bool known_solver(const std::string& name);

// Training columns normalized once, class index lists precomputed.
class SrcModel {
 public:
  explicit SrcModel(const LabeledDataset& train);

  const Dictionary& dict() const { return dict_; }
  int num_classes() const { return int(members_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<Index>& members(int c) const { return members_[c]; }

  // per-class squared residuals of y against the class-restricted reconstruction
  Vector class_residuals(const Vector& y, const Vector& alpha) const;

 private:
  Dictionary dict_;
  std::vector<int> labels_;
  std::vector<std::vector<Index>> members_;
};

// Coefficients from a named solver.
//   mp, omp: ||r|| <= lambda * ||y||
//   half: k = ceil(lambda * n) nonzeros
//   palm, dalm: interpolating, lambda unused
//   every other l1 solver: Lagrangian lambda
SparseSolution solve_named(const std::string& solver, const Dictionary& dict, const Vector& y,
                           double lambda, const SolverConfig& config = {});

ClassResult src_classify(const SrcModel& model, const Vector& y, const std::string& solver,
                         double lambda_or_eps, const SolverConfig& config = {});
ClassResult src_classify(const LabeledDataset& train, const Vector& y, const std::string& solver,
                         double lambda_or_eps, const SolverConfig& config = {});

// m_keep = 0 picks max(num_classes, ceil(0.1 N))
ClassResult tptsr_classify(const SrcModel& model, const Vector& y, double mu = 0.01,
                           Index m_keep = 0);
ClassResult tptsr_classify(const LabeledDataset& train, const Vector& y, double mu = 0.01,
                           Index m_keep = 0);

struct MethodSpec {
  std::string solver = "fista";
  double lambda = 1e-3;  // for tptsr this is mu
  Index tptsr_keep = 0;
  SolverConfig config;
};

struct SplitResult {
  double accuracy = 0.0;
  double per_sample_time = 0.0;  // seconds, sum of per-sample durations / count
  std::vector<int> predictions;
  unsigned flags = 0;
};

ClassResult classify(const SrcModel& model, const Vector& y, const MethodSpec& method);

// test columns are scaled to unit norm before classification
SplitResult evaluate_split(const LabeledDataset& train, const LabeledDataset& test,
                           const MethodSpec& method);
SplitResult evaluate_split_serial(const LabeledDataset& train, const LabeledDataset& test,
                                  const MethodSpec& method);

}  // namespace sparse
