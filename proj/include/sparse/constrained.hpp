#pragma once

#include "sparse/problem.hpp"

namespace sparse {

SparseSolution gpsr_solve(const SparseProblem& problem, const SolverConfig& config = {});

// l1_ls style interior point; gap_trace holds the duality gap per Newton step
SparseSolution tnipm_solve(const SparseProblem& problem, const SolverConfig& config = {});

SparseSolution adm_solve(const SparseProblem& problem, const SolverConfig& config = {});

}  // namespace sparse
