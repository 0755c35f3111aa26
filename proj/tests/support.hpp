#pragma once

// Generators and small oracles shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sparse/problem.hpp"
#include "sparse/rng.hpp"

namespace testing_support {

using sparse::Index;
using sparse::Matrix;
using sparse::Vector;

inline Matrix gaussian(Index r, Index c, std::uint64_t seed) {
  sparse::Rng rng(seed);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

inline Vector gaussian_vec(Index n, std::uint64_t seed) { return gaussian(n, 1, seed).col(0); }

inline Matrix unit_columns(Index r, Index c, std::uint64_t seed) {
  Matrix m = gaussian(r, c, seed);
  m.colwise().normalize();
  return m;
}

// k distinct indices out of n
inline std::vector<Index> random_support(Index n, Index k, sparse::Rng& rng) {
  std::vector<Index> idx(n);
  for (Index i = 0; i < n; ++i) idx[i] = i;
  rng.shuffle(idx);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct Planted {
  Matrix x;
  Vector alpha;
  Vector y;
  std::vector<Index> support;
};

// unit-column Gaussian dictionary, coefficients +-(1 + |N(0,1)|) so none is tiny
inline Planted planted(Index d, Index n, Index k, std::uint64_t seed) {
  Planted p;
  p.x = unit_columns(d, n, seed);
  sparse::Rng rng(sparse::derive_seed(seed, 1));
  p.support = random_support(n, k, rng);
  p.alpha = Vector::Zero(n);
  for (Index i : p.support) p.alpha[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + std::abs(rng.normal()));
  p.y = p.x * p.alpha;
  return p;
}

// Tropp's exact recovery condition: max over j off the support of ||pinv(X_S) x_j||_1 < 1
// guarantees OMP picks the planted support
inline double erc_margin(const Matrix& x, const std::vector<Index>& support) {
  Matrix xs(x.rows(), Index(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) xs.col(Index(i)) = x.col(support[i]);
  const Matrix pinv = (xs.transpose() * xs).inverse() * xs.transpose();
  double worst = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    if (std::find(support.begin(), support.end(), j) != support.end()) continue;
    worst = std::max(worst, (pinv * x.col(j)).cwiseAbs().sum());
  }
  return 1.0 - worst;
}

// planted instance redrawn until the exact recovery condition holds
inline Planted planted_erc(Index d, Index n, Index k, std::uint64_t seed) {
  for (std::uint64_t t = 0;; ++t) {
    Planted p = planted(d, n, k, sparse::derive_seed(seed, 1000 + t));
    if (erc_margin(p.x, p.support) > 0.0) return p;
  }
}

// random d x n instance with lambda = frac * ||X^T y||_inf
inline sparse::SparseProblem lagrangian_instance(std::uint64_t seed, Index d = 10, Index n = 20,
                                                 double frac = 0.1) {
  Matrix x = gaussian(d, n, seed);
  Vector y = gaussian_vec(d, sparse::derive_seed(seed, 7));
  const double lam = frac * (x.transpose() * y).cwiseAbs().maxCoeff();
  return sparse::SparseProblem(sparse::Dictionary(std::move(x)), std::move(y), sparse::Lagrangian{lam});
}

// consistent underdetermined system y = X a with a sparse a
inline sparse::SparseProblem interpolating_instance(std::uint64_t seed, Index d = 8, Index n = 20) {
  Planted p = planted(d, n, 3, seed);
  return sparse::SparseProblem(sparse::Dictionary(std::move(p.x)), std::move(p.y), sparse::Interpolating{});
}

// d x m unit-column dictionary and n samples, each a k-sparse combination of its atoms
struct PlantedTraining {
  Matrix dict;
  Matrix samples;
};

inline PlantedTraining planted_training(Index d, Index m, Index n, Index k, std::uint64_t seed) {
  PlantedTraining t;
  t.dict = unit_columns(d, m, seed);
  t.samples = Matrix::Zero(d, n);
  sparse::Rng rng(sparse::derive_seed(seed, 2));
  for (Index i = 0; i < n; ++i)
    for (Index a : random_support(m, k, rng)) t.samples.col(i) += rng.normal() * t.dict.col(a);
  return t;
}

// fraction of truth atoms matched one-to-one (greedy by |inner product|) above the threshold
inline double matched_fraction(const Matrix& truth, const Matrix& learned, double threshold = 0.95) {
  const Matrix g = (truth.transpose() * learned).cwiseAbs();
  std::vector<char> used_t(truth.cols(), 0), used_l(learned.cols(), 0);
  Index hits = 0;
  for (Index step = 0; step < std::min(truth.cols(), learned.cols()); ++step) {
    double best = -1.0;
    Index bi = -1, bj = -1;
    for (Index i = 0; i < g.rows(); ++i)
      for (Index j = 0; j < g.cols(); ++j)
        if (!used_t[i] && !used_l[j] && g(i, j) > best) {
          best = g(i, j);
          bi = i;
          bj = j;
        }
    if (best <= threshold) break;
    used_t[bi] = used_l[bj] = 1;
    ++hits;
  }
  return double(hits) / double(truth.cols());
}

inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline bool nonincreasing(const std::vector<double>& t, double rel = 1e-12) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1] + rel * std::max(std::abs(t[i - 1]), 1e-300)) return false;
  return true;
}

// golden-section minimizer of a unimodal f on [a, b]
template <class F>
double golden_min(F f, double a, double b, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < iters; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace testing_support
