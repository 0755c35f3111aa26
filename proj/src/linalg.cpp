#include "sparse/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "sparse/error.hpp"

namespace sparse {

double norm_lp(const Vector& v, double p) {
  if (!(p > 0.0)) throw InvalidArgument("norm_lp: p must be positive");
  if (p == 1.0) return v.cwiseAbs().sum();
  if (p == 2.0) return v.norm();
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v[i]), p);
  // below 1 the penalty form is returned, not the root
  return p >= 1.0 ? std::pow(s, 1.0 / p) : s;
}

double l0_tolerance(const Vector& v, double tol) {
  if (tol >= 0.0) return tol;
  return v.size() == 0 ? 0.0 : 1e-8 * v.cwiseAbs().maxCoeff();
}

std::size_t norm_l0(const Vector& v, double tol) {
  const double t = l0_tolerance(v, tol);
  std::size_t n = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > t) ++n;
  return n;
}

double norm_l21(const Matrix& m) { return m.colwise().norm().sum(); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

SvdResult svd(const Matrix& m) {
  if (!m.allFinite()) throw InvalidArgument("svd: non-finite input");
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = dec.singularValues();
  Index r = 0;
  const double cut = s.size() ? 1e-12 * s[0] : 0.0;
  while (r < s.size() && s[r] > cut && s[r] > 0.0) ++r;
  return {dec.matrixU().leftCols(r), s.head(r), dec.matrixV().leftCols(r)};
}

Vector ridge_least_squares(const Matrix& a, const Vector& b, double mu) {
  if (mu < 0.0) throw InvalidArgument("ridge_least_squares: mu must be nonnegative");
  if (a.rows() != b.size()) throw InvalidArgument("ridge_least_squares: dimension mismatch");
  Matrix g = a.transpose() * a;
  g.diagonal().array() += mu;
  const Vector rhs = a.transpose() * b;
  if (mu > 0.0) {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(g);
  qr.setThreshold(1e-12);
  if (qr.rank() < g.cols()) throw SingularSystem("ridge_least_squares: A^T A is rank deficient");
  return qr.solve(rhs);
}

double spectral_norm_sq(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Matrix g = x.rows() <= x.cols() ? Matrix(x * x.transpose()) : Matrix(x.transpose() * x);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

Matrix PcaModel::apply(const Matrix& data) const {
  if (data.rows() != mean.size()) throw InvalidArgument("pca: dimension mismatch");
  return projection * (data.colwise() - mean);
}

PcaModel pca_reduce(const Matrix& data, double energy) {
  if (!(energy > 0.0 && energy <= 1.0)) throw InvalidArgument("pca_reduce: energy must lie in (0,1]");
  if (data.cols() < 2) throw InvalidArgument("pca_reduce: need at least 2 samples");
  PcaModel m;
  m.mean = data.rowwise().mean();
  const Matrix c = data.colwise() - m.mean;
  const double scale = 1.0 / double(data.cols() - 1);

  Matrix dirs;  // d x r, descending
  Vector ev;
  if (c.rows() <= c.cols()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c * c.transpose() * scale);
    ev = es.eigenvalues().reverse();
    dirs = es.eigenvectors().rowwise().reverse();
  } else {
    // Gram trick when samples are fewer than dimensions
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c * scale);
    ev = es.eigenvalues().reverse();
    const Matrix w = es.eigenvectors().rowwise().reverse();
    dirs = c * w;
    for (Index j = 0; j < dirs.cols(); ++j) {
      const double nrm = dirs.col(j).norm();
      if (nrm > 0.0) dirs.col(j) /= nrm;
    }
  }
  ev = ev.cwiseMax(0.0);
  m.eigenvalues = ev;

  Index rank = 0;
  const double cut = ev.size() ? 1e-12 * ev[0] : 0.0;
  while (rank < ev.size() && ev[rank] > cut) ++rank;
  const double total = ev.head(rank).sum();
  Index k = 0;
  if (rank > 0) {
    double acc = 0.0;
    while (k < rank) {
      acc += ev[k++];
      if (acc >= energy * total * (1.0 - 1e-12)) break;
    }
  } else {
    k = 1;  // degenerate: all samples identical
  }
  m.projection = dirs.leftCols(k).transpose();
  m.projected = m.projection * c;
  return m;
}

}  // namespace sparse
