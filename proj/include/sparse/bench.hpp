#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparse/classifiers.hpp"

namespace sparse {

struct BenchConfig {
  std::string dataset;
  std::vector<std::string> solvers = {"omp", "fista", "dalm", "lasso-homotopy", "tptsr"};
  std::vector<double> lambdas;  // empty means the default grid
  Index train_per_class = 5;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  double pca_energy = 0.98;
  std::string output;
  Index resize_height = 0, resize_width = 0;  // 0 keeps the native size
  Index tptsr_keep = 0;
  SolverConfig solver;

  void validate() const;
};

// 10 log-spaced points in [1e-4, 1]
std::vector<double> default_lambda_grid();
// "a:b:Nlog", "a:b:Nlin" or a comma list
std::vector<double> parse_lambda_grid(const std::string& text);

// data.csv + labels.csv, or one subfolder of P5 images per class
LabeledDataset load_dataset(const std::string& path, Index resize_height = 0, Index resize_width = 0);

struct Split {
  std::vector<Index> train, test;
};
// per class: seeded shuffle, first n_train go to train
Split split_per_class(const LabeledDataset& data, Index n_train, std::uint64_t seed);

// false for solvers that ignore the regularization parameter
bool uses_lambda(const std::string& solver);

struct TrialRow {
  std::string solver;
  std::size_t trial = 0;
  double lambda = 0.0;
  double accuracy = 0.0;
  double seconds_per_sample = 0.0;
  unsigned flags = 0;
};

struct SolverSummary {
  std::string solver;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one trial
  double mean_seconds = 0.0;
  std::size_t trials = 0;
};

struct BenchResult {
  std::vector<TrialRow> rows;
  std::vector<SolverSummary> summary;
};

struct MeanStd {
  double mean = 0.0, stddev = 0.0;
};
MeanStd mean_and_std(const std::vector<double>& v);

// Projects train and test with a PCA fit on train only.
void pca_project(const LabeledDataset& train, const LabeledDataset& test, double energy,
                 LabeledDataset& train_out, LabeledDataset& test_out);

// grid search on a 50/50 per-class split of the training partition; ties keep the earlier value
double select_lambda(const LabeledDataset& train, const MethodSpec& base, const std::vector<double>& grid,
                     double pca_energy, std::uint64_t seed);

BenchResult run_benchmark(const BenchConfig& config);
BenchResult run_benchmark(const LabeledDataset& data, const BenchConfig& config);

struct SweepRow {
  std::string solver;
  double lambda = 0.0;
  double accuracy = 0.0;
};
std::vector<SweepRow> sweep_lambda(const LabeledDataset& data, const BenchConfig& config);
std::vector<SweepRow> sweep_lambda(const BenchConfig& config);

// deterministic CSVs (no timing)
void write_trials_csv(std::ostream& out, const BenchResult& r);
void write_summary_csv(std::ostream& out, const BenchResult& r);
void write_timing_csv(std::ostream& out, const BenchResult& r);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace sparse
