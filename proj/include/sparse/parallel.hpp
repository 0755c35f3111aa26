#pragma once

#include "sparse/linalg.hpp"

namespace sparse {

// OMP code for every column of y against dict (max_atoms selections or
// ||r|| <= eps_rel * ||y_i|| + eps_abs). OpenMP over columns; the serial
// version is the reference the tests compare against.
Matrix batch_omp(const Matrix& dict, const Matrix& y, Index max_atoms, double eps_rel,
                 double eps_abs, unsigned* flags = nullptr);
Matrix batch_omp_serial(const Matrix& dict, const Matrix& y, Index max_atoms, double eps_rel,
                        double eps_abs, unsigned* flags = nullptr);

int max_threads();

}  // namespace sparse
