#pragma once

#include "sparse/problem.hpp"

namespace sparse {

// Sparsity(k) or ResidualBound(eps); default residual floor is tolerance * ||y||
SparseSolution mp_solve(const SparseProblem& problem, const SolverConfig& config = {});
SparseSolution omp_solve(const SparseProblem& problem, const SolverConfig& config = {});

// OMP on a raw matrix, used by the batch coders. Stops at max_atoms selections
// or when ||r|| <= eps. Returns the coefficient vector (length n).
Vector omp_code(const Matrix& x, const Vector& y, Index max_atoms, double eps,
                unsigned* flags = nullptr);

}  // namespace sparse
