#include <gtest/gtest.h>

#include <thread>

#include "sparse/error.hpp"
#include "sparse/problem.hpp"
#include "sparse/proximal.hpp"
#include "support.hpp"

using namespace sparse;
using namespace testing_support;

TEST(Dictionary, NormalizedFlagIsChecked) {
  EXPECT_NO_THROW(Dictionary(Matrix::Identity(3, 3), true));
  EXPECT_THROW(Dictionary(2.0 * Matrix::Identity(3, 3), true), InvalidArgument);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(Dictionary{bad}, InvalidArgument);
}

TEST(Dictionary, LipschitzSharedAcrossThreads) {
  const Dictionary d(gaussian(20, 30, 3));
  const double want = spectral_norm_sq(d.atoms());
  std::vector<double> got(4);
  std::vector<std::thread> ts;
  for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] { got[i] = d.lipschitz(); });
  for (auto& t : ts) t.join();
  for (double g : got) EXPECT_EQ(g, want);
}

TEST(NormalizeColumns, Examples) {
  Matrix m(2, 1);
  m << 3, 4;
  const Dictionary d = normalize_columns(m);
  EXPECT_TRUE(d.normalized());
  EXPECT_NEAR(d.atoms()(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(d.atoms()(1, 0), 0.8, 1e-15);
  const Matrix q = unit_columns(4, 6, 8);
  EXPECT_LT((normalize_columns(q).atoms() - q).cwiseAbs().maxCoeff(), 1e-12);
  Matrix z = Matrix::Ones(2, 2);
  z.col(1).setZero();
  EXPECT_THROW(normalize_columns(z), InvalidArgument);
}

TEST(NormalizeColumns, PropertyUnitNorms) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Dictionary d = normalize_columns(gaussian(1 + Index(s % 6), 1 + Index(s % 9), s) * double(s + 1));
    for (Index j = 0; j < d.cols(); ++j) EXPECT_NEAR(d.atoms().col(j).norm(), 1.0, 1e-10);
  }
}

TEST(SparseProblem, Validation) {
  const Dictionary d(Matrix::Identity(3, 3));
  EXPECT_THROW(SparseProblem(d, Vector::Zero(2), Lagrangian{1.0}), InvalidArgument);
  EXPECT_THROW(SparseProblem(d, Vector::Zero(3), Lagrangian{0.0}), InvalidArgument);
  EXPECT_THROW(SparseProblem(d, Vector::Zero(3), Sparsity{4}), InvalidArgument);
  EXPECT_THROW(SparseProblem(d, Vector::Zero(3), ResidualBound{-1.0}), InvalidArgument);
  EXPECT_THROW(SparseProblem(d, Vector::Zero(3), Interpolating{}).lambda(), ConstraintMismatch);
  EXPECT_DOUBLE_EQ(SparseProblem(d, Vector::Zero(3), Lagrangian{0.25}).lambda(), 0.25);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.max_iterations = 1;
  c.tolerance = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.tolerance = 1e-3;
  c.step_overrides["x"] = 2.5;
  EXPECT_EQ(c.param("x", 1.0), 2.5);
  EXPECT_EQ(c.param("y", 1.0), 1.0);
}

TEST(LassoObjective, Examples) {
  const Dictionary d(Matrix::Identity(2, 2));
  const SparseProblem p(d, Vector{{1.0, 0.0}}, Lagrangian{1.0});
  EXPECT_DOUBLE_EQ(lasso_objective(p, Vector::Zero(2)), 0.5);
  EXPECT_DOUBLE_EQ(lasso_objective(p, Vector{{1.0, 0.0}}), 1.0);
  EXPECT_THROW(lasso_objective(SparseProblem(d, Vector::Zero(2), Interpolating{}), Vector::Zero(2)),
               ConstraintMismatch);
}

TEST(LassoObjective, TermByTermOracle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SparseProblem p = lagrangian_instance(s);
    const Vector a = gaussian_vec(20, 1000 + s);
    const double want = 0.5 * std::pow(norm_lp(p.y() - p.x() * a, 2.0), 2) + p.lambda() * norm_lp(a, 1.0);
    EXPECT_NEAR(lasso_objective(p, a), want, 1e-12 * want);
    EXPECT_GE(lasso_objective(p, a), 0.0);
  }
}

TEST(Optimality, ZeroSolutionCertificate) {
  const SparseProblem base = lagrangian_instance(4);
  const double lmax = (base.x().transpose() * base.y()).cwiseAbs().maxCoeff();
  const SparseProblem hi(base.dict(), base.y(), Lagrangian{lmax * 1.01});
  const SparseProblem lo(base.dict(), base.y(), Lagrangian{lmax * 0.9});
  EXPECT_TRUE(check_optimality_l1(hi, Vector::Zero(20), 1e-6));
  EXPECT_FALSE(check_optimality_l1(lo, Vector::Zero(20), 1e-6));
}

TEST(Optimality, SingleColumnClosedForm) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix x = unit_columns(5, 1, s);
    const Vector y = gaussian_vec(5, 50 + s);
    const double lam = 0.1 + 0.2 * double(s % 5);
    const SparseProblem p{Dictionary(x), y, Lagrangian{lam}};
    const Vector a = soft_threshold(x.transpose() * y, lam);
    EXPECT_TRUE(check_optimality_l1(p, a, 1e-9));
    EXPECT_FALSE(check_optimality_l1(p, a + Vector::Constant(1, 0.05), 1e-9));
  }
}

TEST(Optimality, FistaOutputCertified) {
  const SparseProblem p = lagrangian_instance(9);
  SolverConfig c;
  c.max_iterations = 50000;
  c.tolerance = 1e-12;
  EXPECT_TRUE(check_optimality_l1(p, fista_solve(p, c).alpha, 1e-4));
}

TEST(SparseSolution, RecomputationInvariant) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SparseProblem p = lagrangian_instance(s);
    Vector a = gaussian_vec(20, 70 + s);
    for (Index i = 0; i < 20; i += 3) a[i] = 0.0;
    a[1] = 1e-12;  // below the auto l0 tolerance
    const SparseSolution sol = make_solution(p, a);
    EXPECT_NEAR(sol.residual_norm, (p.y() - p.x() * a).norm(), 1e-10);
    EXPECT_EQ(sol.support.size(), norm_l0(a));
    ASSERT_EQ(sol.support.size(), sol.signs.size());
    for (std::size_t k = 0; k < sol.support.size(); ++k) EXPECT_EQ(sol.signs[k], a[sol.support[k]] > 0 ? 1 : -1);
    EXPECT_EQ(std::count(sol.support.begin(), sol.support.end(), Index(1)), 0);
  }
}
