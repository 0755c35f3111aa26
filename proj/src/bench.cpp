#include "sparse/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "sparse/error.hpp"
#include "sparse/image.hpp"
#include "sparse/rng.hpp"

namespace fs = std::filesystem;

namespace sparse {

void BenchConfig::validate() const {
  if (solvers.empty()) throw ConfigError("no solvers given");
  for (const auto& s : solvers)
    if (!known_solver(s)) throw ConfigError("unknown solver: " + s);
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be positive and finite");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (train_per_class < 1) throw ConfigError("train-per-class must be >= 1");
  if (!(pca_energy > 0.0 && pca_energy <= 1.0)) throw ConfigError("pca-energy must lie in (0, 1]");
  if ((resize_height == 0) != (resize_width == 0) || resize_height < 0 || resize_width < 0)
    throw ConfigError("resize needs both a positive height and width");
  try {
    solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> default_lambda_grid() { return parse_lambda_grid("1e-4:1:10log"); }

namespace {

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> parse_lambda_grid(const std::string& text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    std::stringstream ss(t);
    std::string a, b, n;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, n);
    const bool lin = n.size() > 3 && n.substr(n.size() - 3) == "lin";
    const bool log = n.size() > 3 && n.substr(n.size() - 3) == "log";
    if (!lin && !log) throw ConfigError("lambda range must end in log or lin: " + t);
    const double lo = parse_double(a), hi = parse_double(b);
    const double cnt = parse_double(n.substr(0, n.size() - 3));
    if (cnt < 1 || cnt != std::floor(cnt)) throw ConfigError("lambda range needs a positive integer count");
    const auto k = std::size_t(cnt);
    if (log && !(lo > 0.0 && hi > 0.0)) throw ConfigError("log range needs positive bounds");
    for (std::size_t i = 0; i < k; ++i) {
      const double f = k == 1 ? 0.0 : double(i) / double(k - 1);
      out.push_back(log ? std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo)))
                        : lo + f * (hi - lo));
    }
    if (k > 1) {
      out.front() = lo;
      out.back() = hi;
    }
  } else {
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  }
  if (out.empty()) throw ConfigError("empty lambda grid");
  for (double v : out)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("lambda values must be positive and finite");
  return out;
}

namespace {

std::vector<int> remap_labels(const std::vector<long>& raw, int& classes) {
  std::vector<long> uniq = raw;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = int(std::lower_bound(uniq.begin(), uniq.end(), raw[i]) - uniq.begin());
  classes = int(uniq.size());
  return out;
}

LabeledDataset load_csv(const fs::path& dir) {
  std::ifstream data(dir / "data.csv"), lab(dir / "labels.csv");
  if (!data) throw DataError("cannot open " + (dir / "data.csv").string());
  if (!lab) throw DataError("cannot open " + (dir / "labels.csv").string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(data, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(v))
        throw DataError("data.csv line " + std::to_string(lineno) + ": bad value '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("data.csv line " + std::to_string(lineno) + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  std::vector<long> raw;
  lineno = 0;
  while (std::getline(lab, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    long v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      throw DataError("labels.csv line " + std::to_string(lineno) + ": unknown label '" + t + "'");
    raw.push_back(v);
  }
  if (rows.empty()) throw DataError("data.csv has no samples");
  if (raw.size() != rows.size()) throw DataError("labels.csv and data.csv have different lengths");
  Matrix x(Index(rows.front().size()), Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(Index(j), Index(i)) = rows[i][j];
  int classes = 0;
  std::vector<int> labels = remap_labels(raw, classes);
  return LabeledDataset(std::move(x), std::move(labels), classes);
}

LabeledDataset load_pgm_folders(const fs::path& dir, Index rh, Index rw) {
  std::vector<fs::path> classes;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) classes.push_back(e.path());
  std::sort(classes.begin(), classes.end());
  if (classes.empty()) throw DataError(dir.string() + ": no data.csv and no class subfolders");
  std::vector<Vector> cols;
  std::vector<int> labels;
  Index h = -1, w = -1;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(classes[c])) {
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (e.is_regular_file() && ext == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError(classes[c].string() + ": no .pgm images");
    for (const auto& f : files) {
      GrayImage img = read_pgm(f.string());
      if (rh > 0) img = resize_bilinear(img, rh, rw);
      if (h < 0) {
        h = img.height();
        w = img.width();
      } else if (img.height() != h || img.width() != w) {
        throw DataError(f.string() + ": image size differs from the rest of the dataset");
      }
      cols.push_back(img.flatten());
      labels.push_back(int(c));
    }
  }
  Matrix x(h * w, Index(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) x.col(Index(i)) = cols[i];
  return LabeledDataset(std::move(x), std::move(labels), int(classes.size()));
}

}  // namespace

LabeledDataset load_dataset(const std::string& path, Index resize_height, Index resize_width) {
  const fs::path dir(path);
  if (!fs::is_directory(dir)) throw DataError(path + ": not a directory");
  if (fs::exists(dir / "data.csv")) return load_csv(dir);
  return load_pgm_folders(dir, resize_height, resize_width);
}

Split split_per_class(const LabeledDataset& data, Index n_train, std::uint64_t seed) {
  std::vector<std::vector<Index>> by_class(data.num_classes);
  for (Index i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
  Split s;
  Rng rng(seed);
  for (int c = 0; c < data.num_classes; ++c) {
    auto& idx = by_class[c];
    if (Index(idx.size()) < n_train)
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                      " samples, fewer than train-per-class " + std::to_string(n_train));
    rng.shuffle(idx);
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + n_train);
    s.test.insert(s.test.end(), idx.begin() + n_train, idx.end());
  }
  return s;
}

bool uses_lambda(const std::string& solver) { return solver != "palm" && solver != "dalm"; }

MeanStd mean_and_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / double(v.size() - 1));
  }
  return r;
}

void pca_project(const LabeledDataset& train, const LabeledDataset& test, double energy,
                 LabeledDataset& train_out, LabeledDataset& test_out) {
  const PcaModel pca = pca_reduce(train.samples, energy);
  train_out = LabeledDataset(pca.projected, train.labels, train.num_classes);
  test_out.samples = pca.apply(test.samples);
  test_out.labels = test.labels;
  test_out.num_classes = test.num_classes;
}

double select_lambda(const LabeledDataset& train, const MethodSpec& base, const std::vector<double>& grid,
                     double pca_energy, std::uint64_t seed) {
  if (grid.empty()) throw InvalidArgument("select_lambda: empty grid");
  if (grid.size() == 1 || !uses_lambda(base.solver)) return grid.front();
  Index per_class = train.size();
  {
    std::vector<Index> cnt(train.num_classes, 0);
    for (int l : train.labels) ++cnt[l];
    per_class = *std::min_element(cnt.begin(), cnt.end());
  }
  // every class needs a sample on both sides
  if (per_class < 2) return grid.front();
  const Split inner = split_per_class(train, (per_class + 1) / 2, seed);
  LabeledDataset tr, va;
  pca_project(train.subset(inner.train), train.subset(inner.test), pca_energy, tr, va);
  double best = grid.front(), best_acc = -1.0;
  for (double l : grid) {
    MethodSpec m = base;
    m.lambda = l;
    const double acc = evaluate_split(tr, va, m).accuracy;
    if (acc > best_acc) {
      best_acc = acc;
      best = l;
    }
  }
  return best;
}

BenchResult run_benchmark(const LabeledDataset& data, const BenchConfig& config) {
  config.validate();
  const std::vector<double> grid = config.lambdas.empty() ? default_lambda_grid() : config.lambdas;
  BenchResult res;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const std::uint64_t split_seed = derive_seed(config.seed, 2 * t);
    const Split s = split_per_class(data, config.train_per_class, split_seed);
    if (s.test.empty()) throw DataError("no test samples left after the split");
    const LabeledDataset train_raw = data.subset(s.train);
    LabeledDataset train, test;
    pca_project(train_raw, data.subset(s.test), config.pca_energy, train, test);
    for (const auto& name : config.solvers) {
      MethodSpec m;
      m.solver = name;
      m.config = config.solver;
      m.tptsr_keep = config.tptsr_keep;
      m.lambda = select_lambda(train_raw, m, grid, config.pca_energy, derive_seed(config.seed, 2 * t + 1));
      const SplitResult r = evaluate_split(train, test, m);
      res.rows.push_back({name, t, m.lambda, r.accuracy, r.per_sample_time, r.flags});
    }
  }
  for (const auto& name : config.solvers) {
    std::vector<double> acc, secs;
    for (const auto& row : res.rows)
      if (row.solver == name) {
        acc.push_back(row.accuracy);
        secs.push_back(row.seconds_per_sample);
      }
    const MeanStd ms = mean_and_std(acc);
    res.summary.push_back({name, ms.mean, ms.stddev, mean_and_std(secs).mean, acc.size()});
  }
  return res;
}

BenchResult run_benchmark(const BenchConfig& config) {
  config.validate();
  return run_benchmark(load_dataset(config.dataset, config.resize_height, config.resize_width), config);
}

std::vector<SweepRow> sweep_lambda(const LabeledDataset& data, const BenchConfig& config) {
  config.validate();
  const std::vector<double> grid = config.lambdas.empty() ? default_lambda_grid() : config.lambdas;
  const Split s = split_per_class(data, config.train_per_class, derive_seed(config.seed, 0));
  if (s.test.empty()) throw DataError("no test samples left after the split");
  LabeledDataset train, test;
  pca_project(data.subset(s.train), data.subset(s.test), config.pca_energy, train, test);
  std::vector<SweepRow> rows;
  for (const auto& name : config.solvers)
    for (double l : grid) {
      MethodSpec m;
      m.solver = name;
      m.lambda = l;
      m.config = config.solver;
      m.tptsr_keep = config.tptsr_keep;
      rows.push_back({name, l, evaluate_split(train, test, m).accuracy});
    }
  return rows;
}

std::vector<SweepRow> sweep_lambda(const BenchConfig& config) {
  config.validate();
  return sweep_lambda(load_dataset(config.dataset, config.resize_height, config.resize_width), config);
}

void write_trials_csv(std::ostream& out, const BenchResult& r) {
  out << "solver,trial,lambda,accuracy\n";
  for (const auto& row : r.rows)
    out << row.solver << ',' << row.trial << ',' << fmt(row.lambda) << ',' << fmt(row.accuracy) << '\n';
}

void write_summary_csv(std::ostream& out, const BenchResult& r) {
  out << "solver,trials,mean_accuracy,std_accuracy\n";
  for (const auto& s : r.summary)
    out << s.solver << ',' << s.trials << ',' << fmt(s.mean) << ',' << fmt(s.stddev) << '\n';
}

void write_timing_csv(std::ostream& out, const BenchResult& r) {
  out << "solver,trial,seconds_per_test_sample,flags\n";
  for (const auto& row : r.rows)
    out << row.solver << ',' << row.trial << ',' << fmt(row.seconds_per_sample) << ',' << row.flags << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "solver,lambda,accuracy\n";
  for (const auto& r : rows) out << r.solver << ',' << fmt(r.lambda) << ',' << fmt(r.accuracy) << '\n';
}

}  // namespace sparse
