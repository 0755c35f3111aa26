#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "sparse/bench.hpp"
#include "sparse/error.hpp"
#include "sparse/image.hpp"
#include "toy_data.hpp"

using namespace sparse;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

BenchConfig toy_config() {
  BenchConfig c;
  c.train_per_class = 5;
  c.trials = 3;
  c.seed = 11;
  c.solvers = {"omp", "fista", "tptsr"};
  c.lambdas = {1e-3, 1e-2, 1e-1};
  return c;
}

double variance(const std::vector<SweepRow>& rows, const std::string& solver) {
  std::vector<double> acc;
  for (const auto& r : rows)
    if (r.solver == solver) acc.push_back(r.accuracy);
  const MeanStd ms = mean_and_std(acc);
  return ms.stddev * ms.stddev;
}

}  // namespace

TEST(LoadDataset, CsvRoundTrip) {
  const fs::path dir = scratch_dir("csv");
  {
    std::ofstream(dir / "data.csv") << "0.5, -1.25, 3\n1e-3 2 0.1\n";
    std::ofstream(dir / "labels.csv") << "7\n3\n";
  }
  const LabeledDataset d = load_dataset(dir.string());
  ASSERT_EQ(d.size(), 2);
  ASSERT_EQ(d.dim(), 3);
  EXPECT_EQ(d.samples.col(0), (Vector{{0.5, -1.25, 3.0}}));
  EXPECT_EQ(d.samples.col(1), (Vector{{1e-3, 2.0, 0.1}}));
  EXPECT_EQ(d.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(d.num_classes, 2);

  const LabeledDataset toy = subspace_toy(1, 3, 4, 6, 0.1);
  write_csv_dataset(dir / "toy", toy);
  const LabeledDataset back = load_dataset((dir / "toy").string());
  EXPECT_EQ(back.samples, toy.samples);
  EXPECT_EQ(back.labels, toy.labels);
  fs::remove_all(dir);
}

TEST(LoadDataset, CsvErrors) {
  const fs::path dir = scratch_dir("csv_bad");
  std::ofstream(dir / "data.csv") << "1 2\n3\n";
  std::ofstream(dir / "labels.csv") << "0\n1\n";
  EXPECT_THROW(load_dataset(dir.string()), DataError);
  std::ofstream(dir / "data.csv", std::ios::trunc) << "1 2\n3 x\n";
  EXPECT_THROW(load_dataset(dir.string()), DataError);
  std::ofstream(dir / "data.csv", std::ios::trunc) << "1 2\n3 4\n";
  std::ofstream(dir / "labels.csv", std::ios::trunc) << "0\ncat\n";
  EXPECT_THROW(load_dataset(dir.string()), DataError);
  std::ofstream(dir / "labels.csv", std::ios::trunc) << "0\n";
  EXPECT_THROW(load_dataset(dir.string()), DataError);
  EXPECT_THROW(load_dataset((dir / "missing").string()), DataError);
  fs::remove_all(dir);
}

TEST(LoadDataset, PgmFolders) {
  const fs::path dir = scratch_dir("pgm");
  fs::create_directories(dir / "only");
  GrayImage a(4, 6, 10.0), b(4, 6, 20.0);
  a(1, 2) = 200.0;
  write_pgm((dir / "only" / "b.pgm").string(), b);
  write_pgm((dir / "only" / "a.pgm").string(), a);
  const LabeledDataset one = load_dataset(dir.string());
  ASSERT_EQ(one.size(), 2);
  EXPECT_EQ(one.labels, (std::vector<int>{0, 0}));
  EXPECT_EQ(one.dim(), 24);
  EXPECT_EQ(Vector(one.samples.col(0)), a.flatten());  // lexicographic order

  fs::create_directories(dir / "other");
  write_pgm((dir / "other" / "c.pgm").string(), b);
  const LabeledDataset two = load_dataset(dir.string(), 2, 3);
  EXPECT_EQ(two.num_classes, 2);
  EXPECT_EQ(two.dim(), 6);
  EXPECT_EQ(two.labels, (std::vector<int>{0, 0, 1}));

  write_pgm((dir / "other" / "d.pgm").string(), GrayImage(5, 5, 1.0));
  EXPECT_THROW(load_dataset(dir.string()), DataError);
  fs::remove_all(dir);
}

TEST(Split, DisjointAndExhaustivePerClass) {
  const LabeledDataset d = subspace_toy(2, 4, 9, 5, 0.1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Split s = split_per_class(d, 3, seed);
    std::set<Index> tr(s.train.begin(), s.train.end()), te(s.test.begin(), s.test.end());
    EXPECT_EQ(tr.size(), s.train.size());
    EXPECT_EQ(te.size(), s.test.size());
    for (Index i : tr) EXPECT_EQ(te.count(i), 0u);
    EXPECT_EQ(Index(tr.size() + te.size()), d.size());
    std::vector<int> per(4, 0);
    for (Index i : s.train) ++per[d.labels[i]];
    for (int c : per) EXPECT_EQ(c, 3);
  }
  EXPECT_EQ(split_per_class(d, 3, 5).train, split_per_class(d, 3, 5).train);
  EXPECT_THROW(split_per_class(d, 10, 0), DataError);
}

TEST(Pca, FitOnTrainOnly) {
  const LabeledDataset d = subspace_toy(3, 3, 10, 12, 0.3);
  const Split s = split_per_class(d, 5, 1);
  const LabeledDataset train = d.subset(s.train);
  LabeledDataset test = d.subset(s.test);
  LabeledDataset tr1, te1, tr2, te2;
  pca_project(train, test, 0.98, tr1, te1);
  test.samples = 1e3 * gaussian(12, test.size(), 9);
  pca_project(train, test, 0.98, tr2, te2);
  EXPECT_EQ(tr1.samples, tr2.samples);
  EXPECT_EQ(tr1.dim(), tr2.dim());
  EXPECT_EQ(te1.dim(), te2.dim());
  EXPECT_EQ(te1.dim(), tr1.dim());
  EXPECT_LT(tr1.dim(), 12);
}

TEST(MeanStd, SampleStandardDeviation) {
  const MeanStd m = mean_and_std({1.0, 2.0, 4.0});
  EXPECT_NEAR(m.mean, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.stddev, std::sqrt((16.0 + 1.0 + 25.0) / 9.0 / 2.0), 1e-12);
  EXPECT_EQ(mean_and_std({0.5}).stddev, 0.0);
}

TEST(LambdaGrid, Parsing) {
  const std::vector<double> g = default_lambda_grid();
  ASSERT_EQ(g.size(), 10u);
  EXPECT_NEAR(g.front(), 1e-4, 1e-18);
  EXPECT_NEAR(g.back(), 1.0, 1e-15);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], std::pow(1e4, 1.0 / 9.0), 1e-12);
  EXPECT_EQ(parse_lambda_grid("0.5:1:3lin"), (std::vector<double>{0.5, 0.75, 1.0}));
  EXPECT_THROW(parse_lambda_grid("0:1:3lin"), ConfigError);
  EXPECT_EQ(parse_lambda_grid("0.1, 0.2"), (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(parse_lambda_grid("0.3").size(), 1u);
  EXPECT_THROW(parse_lambda_grid("1:2:xlog"), ConfigError);
  EXPECT_THROW(parse_lambda_grid("0:1:3log"), ConfigError);
  EXPECT_THROW(parse_lambda_grid(""), ConfigError);
}

TEST(BenchConfig, Validation) {
  BenchConfig c = toy_config();
  EXPECT_NO_THROW(c.validate());
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = toy_config();
  c.pca_energy = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = toy_config();
  c.solvers = {"nope"};
  EXPECT_THROW(c.validate(), ConfigError);
  c = toy_config();
  c.lambdas = {-1.0};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunBenchmark, SeparableToyIsPerfect) {
  const LabeledDataset d = subspace_toy(4, 3, 12, 20, 0.01);
  BenchConfig c = toy_config();
  c.trials = 1;
  c.solvers = {"dalm", "lasso-homotopy"};
  const BenchResult r = run_benchmark(d, c);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) EXPECT_EQ(row.accuracy, 1.0) << row.solver;
}

TEST(RunBenchmark, SummaryRecomputableAndDeterministic) {
  const LabeledDataset d = subspace_toy(5, 3, 10, 15, 0.6);
  const BenchConfig c = toy_config();
  const BenchResult a = run_benchmark(d, c);
  ASSERT_EQ(a.rows.size(), 9u);
  for (const auto& s : a.summary) {
    std::vector<double> acc;
    for (const auto& row : a.rows)
      if (row.solver == s.solver) acc.push_back(row.accuracy);
    double mean = 0.0, ss = 0.0;
    for (double v : acc) mean += v / double(acc.size());
    for (double v : acc) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(s.mean, mean, 1e-12);
    EXPECT_NEAR(s.stddev, std::sqrt(ss / double(acc.size() - 1)), 1e-12);
    EXPECT_EQ(s.trials, 3u);
  }
  for (const auto& row : a.rows) {
    EXPECT_GE(row.accuracy, 0.0);
    EXPECT_LE(row.accuracy, 1.0);
  }
  const BenchResult b = run_benchmark(d, c);
  std::ostringstream ta, tb, sa, sb;
  write_trials_csv(ta, a);
  write_trials_csv(tb, b);
  write_summary_csv(sa, a);
  write_summary_csv(sb, b);
  EXPECT_EQ(ta.str(), tb.str());
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(ta.str().substr(0, ta.str().find('\n')), "solver,trial,lambda,accuracy");
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), "solver,trials,mean_accuracy,std_accuracy");
  std::ostringstream tm;
  write_timing_csv(tm, a);
  EXPECT_EQ(tm.str().substr(0, tm.str().find('\n')), "solver,trial,seconds_per_test_sample,flags");
}

TEST(RunBenchmark, TooFewSamplesIsDataError) {
  const LabeledDataset d = subspace_toy(6, 2, 4, 5, 0.1);
  BenchConfig c = toy_config();
  c.train_per_class = 4;
  EXPECT_THROW(run_benchmark(d, c), DataError);
  c.train_per_class = 6;
  EXPECT_THROW(run_benchmark(d, c), DataError);
}

TEST(SelectLambda, TiesKeepEarlierAndFixedSolvers) {
  const LabeledDataset d = subspace_toy(7, 3, 10, 15, 0.01);
  MethodSpec m;
  m.solver = "dalm";
  EXPECT_EQ(select_lambda(d, m, {0.5, 0.1}, 0.98, 1), 0.5);
  m.solver = "fista";
  EXPECT_EQ(select_lambda(d, m, {0.2}, 0.98, 1), 0.2);
  // both bounds are far below any residual OMP reaches, so the codes and accuracies coincide
  m.solver = "omp";
  EXPECT_EQ(select_lambda(d, m, {1e-12, 1e-13}, 0.98, 1), 1e-12);
  EXPECT_EQ(select_lambda(d, m, {1e-13, 1e-12}, 0.98, 1), 1e-13);
}

TEST(SweepLambda, RowsAndRange) {
  const LabeledDataset d = subspace_toy(8, 3, 10, 15, 0.6);
  BenchConfig c = toy_config();
  c.lambdas = {0.01};
  const std::vector<SweepRow> one = sweep_lambda(d, c);
  ASSERT_EQ(one.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(one[i].solver, c.solvers[i]);
  c.lambdas = default_lambda_grid();
  const std::vector<SweepRow> full = sweep_lambda(d, c);
  EXPECT_EQ(full.size(), 30u);
  for (const auto& r : full) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
  }
  std::ostringstream out;
  write_sweep_csv(out, one);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "solver,lambda,accuracy");
}

TEST(SweepLambda, TptsrFlatterThanL1Solvers) {
  const LabeledDataset d = subspace_toy(9, 4, 15, 20, 0.8);
  BenchConfig c = toy_config();
  c.solvers = {"tptsr", "fista", "l1ls", "lasso-homotopy"};
  c.lambdas = default_lambda_grid();
  const std::vector<SweepRow> rows = sweep_lambda(d, c);
  const double t = variance(rows, "tptsr");
  RecordProperty("tptsr_variance", std::to_string(t));
  for (const char* s : {"fista", "l1ls", "lasso-homotopy"}) {
    RecordProperty(std::string(s) + "_variance", std::to_string(variance(rows, s)));
    EXPECT_LT(t, variance(rows, s)) << s;
  }
}
