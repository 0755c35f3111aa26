#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace sparse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// pass as tol to norm_l0 to get 1e-8 * max|v_i|
inline constexpr double kAutoTol = -1.0;

double norm_lp(const Vector& v, double p);
std::size_t norm_l0(const Vector& v, double tol = kAutoTol);
double l0_tolerance(const Vector& v, double tol = kAutoTol);
double norm_l21(const Matrix& m);

struct SvdResult {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

// thin SVD, singular values below 1e-12 * max dropped
SvdResult svd(const Matrix& m);

// (A^T A + mu I)^{-1} A^T b
Vector ridge_least_squares(const Matrix& a, const Vector& b, double mu);

// largest eigenvalue of X^T X
double spectral_norm_sq(const Matrix& x);

struct PcaModel {
  Vector mean;
  Matrix projection;  // k x d, orthonormal rows
  Vector eigenvalues;  // all eigenvalues of the centered covariance, descending
  Matrix projected;  // k x N

  Matrix apply(const Matrix& data) const;
  Index dims() const { return projection.rows(); }
};

// columns of data are samples
PcaModel pca_reduce(const Matrix& data, double energy);

bool all_finite(const Matrix& m);

}  // namespace sparse
