#pragma once

#include "sparse/problem.hpp"

namespace sparse {

struct ProximalState {
  Vector alpha;
  Vector momentum_alpha;
  double mu_seq = 1.0;
  double step_tau = 1.0;
  double lambda_current = 0.0;
};

Vector soft_threshold(const Vector& s, double lambda);

// componentwise l1/2 thresholding operator with parameter lambda * tau
Vector half_threshold(const Vector& x, double lambda, double tau);
double half_threshold_level(double lambda, double tau);

SparseSolution ista_solve(const SparseProblem& problem, const SolverConfig& config = {});
SparseSolution fista_solve(const SparseProblem& problem, const SolverConfig& config = {});
SparseSolution sparsa_solve(const SparseProblem& problem, const SolverConfig& config = {});
SparseSolution half_proximal_solve(const SparseProblem& problem, const SolverConfig& config,
                                   Index k);
SparseSolution palm_solve(const SparseProblem& problem, const SolverConfig& config = {});

struct DalmTrace {
  double max_z_abs = 0.0;  // largest |z_i| seen over all iterates
};
SparseSolution dalm_solve(const SparseProblem& problem, const SolverConfig& config = {},
                          DalmTrace* trace = nullptr);

}  // namespace sparse
