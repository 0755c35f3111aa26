#include <gtest/gtest.h>

#include <set>

#include "sparse/error.hpp"
#include "sparse/greedy.hpp"
#include "support.hpp"

using namespace sparse;
using namespace testing_support;

TEST(Mp, OrthonormalSingleAtom) {
  const SparseProblem p(Dictionary(Matrix::Identity(3, 3)), Vector{{0.0, 5.0, 0.0}}, Sparsity{1});
  const SparseSolution s = mp_solve(p);
  EXPECT_EQ(s.alpha, (Vector{{0.0, 5.0, 0.0}}));
  EXPECT_EQ(s.residual_norm, 0.0);
}

TEST(Mp, ZeroProbe) {
  const SparseProblem p(Dictionary(unit_columns(4, 6, 1)), Vector::Zero(4), Sparsity{3});
  const SparseSolution s = mp_solve(p);
  EXPECT_TRUE(s.alpha.isZero(0.0));
  EXPECT_EQ(s.iterations, 0u);
}

TEST(Mp, TwoCoherentAtomsHandRecursion) {
  // atoms at 60 degrees, y their sum
  Matrix x(2, 2);
  x << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
  const Vector y = x.col(0) + x.col(1);
  const SparseProblem p(Dictionary(x, true), y, ResidualBound{1e-13});
  SolverConfig cfg;
  cfg.max_iterations = 4;
  const SparseSolution s = mp_solve(p, cfg);
  // by hand: +1.5 a1, +0.75 a2, -0.375 a1, +0.1875 a2
  Vector r = y;
  double prev = r.squaredNorm();
  Vector alpha = Vector::Zero(2);
  for (int t = 0; t < 4; ++t) {
    const Vector c = x.transpose() * r;
    const Index j = std::abs(c[1]) > std::abs(c[0]) ? 1 : 0;
    alpha[j] += c[j];
    r -= c[j] * x.col(j);
    EXPECT_LT(r.squaredNorm(), prev);
    EXPECT_NEAR(prev, c[j] * c[j] + r.squaredNorm(), 1e-12);
    prev = r.squaredNorm();
  }
  EXPECT_LT((s.alpha - alpha).norm(), 1e-12);
  EXPECT_NEAR(s.alpha[0], 1.125, 1e-12);
  EXPECT_NEAR(s.alpha[1], 0.9375, 1e-12);
  EXPECT_NEAR(s.objective_trace[1], std::sqrt(0.75), 1e-12);
}

TEST(Mp, PropertyEnergyConservation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix x = unit_columns(8, 15, seed);
    const Vector y = gaussian_vec(8, 100 + seed);
    Vector prev = Vector::Zero(15);
    double prev_r2 = y.squaredNorm();
    for (Index k = 1; k <= 10; ++k) {
      const SparseSolution s = mp_solve(SparseProblem(Dictionary(x, true), y, Sparsity{k}));
      const double step = (s.alpha - prev).cwiseAbs().maxCoeff();
      const double r2 = s.residual_norm * s.residual_norm;
      EXPECT_NEAR(prev_r2, step * step + r2, 1e-10 * y.squaredNorm());
      prev = s.alpha;
      prev_r2 = r2;
    }
  }
}

TEST(Mp, ResidualBoundNotMetIsFlagged) {
  const SparseProblem p(Dictionary(unit_columns(10, 12, 3)), gaussian_vec(10, 4), ResidualBound{1e-13});
  SolverConfig c;
  c.max_iterations = 5;
  const SparseSolution s = mp_solve(p, c);
  EXPECT_FALSE(s.converged);
  EXPECT_EQ(s.iterations, 5u);
}

TEST(Omp, Examples) {
  const SparseProblem p(Dictionary(Matrix::Identity(3, 3)), Vector{{0.0, 5.0, 0.0}}, Sparsity{1});
  EXPECT_EQ(omp_solve(p).alpha, (Vector{{0.0, 5.0, 0.0}}));

  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(5, 2, 9)).householderQ() * Matrix::Identity(5, 2);
  const Vector y = 3.0 * q.col(0) - 2.0 * q.col(1);
  const SparseSolution s = omp_solve(SparseProblem(Dictionary(q), y, Sparsity{2}));
  EXPECT_NEAR(s.alpha[0], 3.0, 1e-12);
  EXPECT_NEAR(s.alpha[1], -2.0, 1e-12);
  EXPECT_LT(s.residual_norm, 1e-10);
}

TEST(Omp, PlantedRecovery) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Planted pl = planted_erc(16, 32, 3, seed);
    const SparseSolution s = omp_solve(SparseProblem(Dictionary(pl.x), pl.y, Sparsity{3}));
    EXPECT_EQ(s.support, pl.support) << "seed " << seed;
    EXPECT_LT((s.alpha - pl.alpha).cwiseAbs().maxCoeff(), 1e-8) << "seed " << seed;
  }
}

TEST(Omp, PropertyProjectionAndMonotonicity) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Matrix x = unit_columns(12, 20, 40 + seed);
    const Vector y = gaussian_vec(12, 80 + seed);
    const Index k = 1 + Index(seed % 8);
    const SparseSolution s = omp_solve(SparseProblem(Dictionary(x), y, Sparsity{k}));
    const std::set<Index> sup(s.support.begin(), s.support.end());
    EXPECT_EQ(sup.size(), s.support.size());
    EXPECT_LE(Index(s.support.size()), k);
    // explicit projector oracle
    Matrix xs(12, Index(s.support.size()));
    for (std::size_t i = 0; i < s.support.size(); ++i) xs.col(Index(i)) = x.col(s.support[i]);
    const Matrix proj = xs * (xs.transpose() * xs).inverse() * xs.transpose();
    const Vector r = y - x * s.alpha;
    EXPECT_LT((r - (y - proj * y)).norm(), 1e-8 * y.norm());
    EXPECT_LT((xs.transpose() * r).cwiseAbs().maxCoeff(), 1e-8 * y.norm());
    for (std::size_t t = 1; t < s.objective_trace.size(); ++t)
      EXPECT_LT(s.objective_trace[t], s.objective_trace[t - 1]);
  }
}

TEST(Omp, DuplicateAtomUsesRidge) {
  Matrix x = unit_columns(6, 4, 5);
  x.col(3) = x.col(0);
  const Vector y = x.col(0) + 0.5 * x.col(1);
  unsigned flags = 0;
  // the duplicate can never be selected after its twin: zero correlation with the residual
  const Vector a = omp_code(x, y, 4, 0.0, &flags);
  EXPECT_TRUE(a.allFinite());
  EXPECT_LT((y - x * a).norm(), 1e-10);
}

TEST(Omp, NearlyParallelAtomsFlagRidge) {
  Matrix x(3, 2);
  x << 1.0, 1.0, 0.0, 1e-7, 0.0, 0.0;
  const Vector y{{1.0, 1.0, 0.0}};
  unsigned flags = 0;
  const Vector a = omp_code(x, y, 2, 0.0, &flags);
  EXPECT_TRUE(a.allFinite());
  EXPECT_TRUE(flags & kRidgeFallback);
}

TEST(Omp, ResidualBoundStops) {
  const Planted pl = planted(16, 32, 5, 77);
  const SparseSolution s = omp_solve(SparseProblem(Dictionary(pl.x), pl.y, ResidualBound{0.3 * pl.y.norm()}));
  EXPECT_TRUE(s.converged);
  EXPECT_LE(s.residual_norm, 0.3 * pl.y.norm());
  EXPECT_THROW(omp_solve(SparseProblem(Dictionary(pl.x), pl.y, Lagrangian{1.0})), ConstraintMismatch);
}
