#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "sparse/problem.hpp"

namespace sparse {

enum class PathEvent { kAtomAdded, kAtomRemoved, kTerminal };

struct HomotopyPathPoint {
  double lambda = 0.0;
  Vector alpha;
  std::vector<Index> support;
  std::vector<int> signs;
  PathEvent event = PathEvent::kTerminal;
  Index index = -1;  // atom added or removed, -1 for terminal
};

using HomotopyPath = std::vector<HomotopyPathPoint>;

// Interpolating (path to lambda = 0) or Lagrangian (stop at the target lambda)
std::pair<SparseSolution, HomotopyPath> lasso_homotopy(const SparseProblem& problem,
                                                       const SolverConfig& config = {});

// weighted penalty sum_i w_i |alpha_i|; lasso_homotopy is the w = 1 case with weights scaled by lambda
std::pair<SparseSolution, HomotopyPath> weighted_lasso_homotopy(const SparseProblem& problem,
                                                                const Vector& weights,
                                                                double target,
                                                                const SolverConfig& config = {});

SparseSolution bpdn_homotopy(const SparseProblem& problem, const SolverConfig& config = {});

// step_overrides: "rounds" (default 4), "sigma_w" (default 1e-2)
// final_weights receives the weights the returned solution is optimal for
SparseSolution reweighted_homotopy(const SparseProblem& problem, const Vector& weights,
                                   const SolverConfig& config = {},
                                   Vector* final_weights = nullptr);

// lambda,event,index,nnz
void write_path_csv(std::ostream& out, const HomotopyPath& path);

}  // namespace sparse
