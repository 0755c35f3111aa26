#include <benchmark/benchmark.h>

#include "sparse/classifiers.hpp"
#include "sparse/denoise.hpp"
#include "sparse/parallel.hpp"
#include "sparse/rng.hpp"

using namespace sparse;

namespace {

Matrix gaussian(Index r, Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

const Matrix& dict() {
  static const Matrix d = gaussian(64, 256, 1).colwise().normalized();
  return d;
}
const Matrix& signals() {
  static const Matrix y = gaussian(64, 2000, 2);
  return y;
}

void BM_BatchOmpSerial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(batch_omp_serial(dict(), signals(), 8, 0.0, 0.0));
}
void BM_BatchOmpParallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(batch_omp(dict(), signals(), 8, 0.0, 0.0));
}

struct Toy {
  LabeledDataset train, test;
  Toy() {
    Rng rng(3);
    Matrix centers = gaussian(30, 5, 4) * 3.0;
    auto make = [&](Index per) {
      Matrix x(30, 5 * per);
      std::vector<int> l;
      for (Index c = 0; c < 5; ++c)
        for (Index i = 0; i < per; ++i) {
          for (Index r = 0; r < 30; ++r) x(r, c * per + i) = centers(r, c) + rng.normal();
          l.push_back(int(c));
        }
      return LabeledDataset(x, l);
    };
    train = make(10);
    test = make(40);
  }
};
const Toy& toy() {
  static const Toy t;
  return t;
}

void BM_SplitSerial(benchmark::State& st) {
  MethodSpec m{"fista", 1e-2, 0, {}};
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_split_serial(toy().train, toy().test, m));
}
void BM_SplitParallel(benchmark::State& st) {
  MethodSpec m{"fista", 1e-2, 0, {}};
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_split(toy().train, toy().test, m));
}

struct Patches {
  GrayImage img;
  PatchGrid grid;
  Patches() : img(GrayImage(gaussian(256, 256, 5) * 20.0 + Matrix::Constant(256, 256, 128.0))) {
    grid = extract_patches(img, 8, 1);
  }
};
const Patches& patches() {
  static const Patches p;
  return p;
}

void BM_AggregateSerial(benchmark::State& st) {
  const auto& p = patches();
  for (auto _ : st) benchmark::DoNotOptimize(aggregate_patches_serial(p.grid, p.grid.patches, p.img, 1.0));
}
void BM_AggregateParallel(benchmark::State& st) {
  const auto& p = patches();
  for (auto _ : st) benchmark::DoNotOptimize(aggregate_patches(p.grid, p.grid.patches, p.img, 1.0));
}

}  // namespace

BENCHMARK(BM_BatchOmpSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchOmpParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SplitSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SplitParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AggregateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AggregateParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
