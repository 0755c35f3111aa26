#include "sparse/parallel.hpp"

#include <omp.h>

#include "sparse/greedy.hpp"

namespace sparse {

int max_threads() { return omp_get_max_threads(); }

Matrix batch_omp_serial(const Matrix& dict, const Matrix& y, Index max_atoms, double eps_rel,
                        double eps_abs, unsigned* flags) {
  Matrix codes = Matrix::Zero(dict.cols(), y.cols());
  unsigned f = 0;
  for (Index i = 0; i < y.cols(); ++i)
    codes.col(i) = omp_code(dict, y.col(i), max_atoms, eps_rel * y.col(i).norm() + eps_abs, &f);
  if (flags) *flags |= f;
  return codes;
}

Matrix batch_omp(const Matrix& dict, const Matrix& y, Index max_atoms, double eps_rel,
                 double eps_abs, unsigned* flags) {
  Matrix codes = Matrix::Zero(dict.cols(), y.cols());
  unsigned f = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(| : f)
  for (Index i = 0; i < y.cols(); ++i) {
    unsigned local = 0;
    codes.col(i) = omp_code(dict, y.col(i), max_atoms, eps_rel * y.col(i).norm() + eps_abs, &local);
    f |= local;
  }
  if (flags) *flags |= f;
  return codes;
}

}  // namespace sparse
