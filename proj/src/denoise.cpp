#include "sparse/denoise.hpp"

#include <cmath>
#include <numbers>

#include "sparse/dictionary.hpp"
#include "sparse/error.hpp"
#include "sparse/parallel.hpp"

namespace sparse {

std::vector<Index> patch_positions(Index n, Index p, Index stride) {
  std::vector<Index> pos;
  for (Index i = 0; i + p <= n; i += stride) pos.push_back(i);
  if (pos.back() != n - p) pos.push_back(n - p);
  return pos;
}

PatchGrid extract_patches(const GrayImage& img, Index p, Index stride) {
  if (p < 1 || stride < 1) throw InvalidArgument("extract_patches: patch size and stride must be >= 1");
  if (p > img.height() || p > img.width()) throw InvalidArgument("extract_patches: patch larger than image");
  PatchGrid g;
  g.patch = p;
  g.stride = stride;
  g.height = img.height();
  g.width = img.width();
  const auto rp = patch_positions(img.height(), p, stride);
  const auto cp = patch_positions(img.width(), p, stride);
  g.patches.resize(p * p, Index(rp.size() * cp.size()));
  Index j = 0;
  for (Index r : rp)
    for (Index c : cp) {
      for (Index a = 0; a < p; ++a)
        for (Index b = 0; b < p; ++b) g.patches(a * p + b, j) = img(r + a, c + b);
      g.rows.push_back(r);
      g.cols.push_back(c);
      ++j;
    }
  return g;
}

namespace {

// output row r from every patch covering it, in (top row, column index) order
void aggregate_row(const PatchGrid& g, const std::vector<std::vector<Index>>& by_top, const Matrix& recon,
                   const GrayImage& noisy, double delta, Index r, GrayImage& out) {
  const Index p = g.patch;
  Vector sum = delta * noisy.pixels.row(r).transpose();
  Vector cover = Vector::Constant(g.width, delta);
  for (Index t = std::max<Index>(0, r - p + 1); t <= r && t < Index(by_top.size()); ++t) {
    for (Index j : by_top[t]) {
      const Index a = r - t;
      for (Index b = 0; b < p; ++b) {
        sum[g.cols[j] + b] += recon(a * p + b, j);
        cover[g.cols[j] + b] += 1.0;
      }
    }
  }
  out.pixels.row(r) = sum.cwiseQuotient(cover).transpose();
}

GrayImage aggregate(const PatchGrid& g, const Matrix& recon, const GrayImage& noisy, double delta, bool parallel) {
  if (recon.rows() != g.patch * g.patch || recon.cols() != g.count())
    throw InvalidArgument("aggregate: reconstruction does not match the patch grid");
  if (noisy.height() != g.height || noisy.width() != g.width)
    throw InvalidArgument("aggregate: image does not match the patch grid");
  if (delta < 0.0) throw InvalidArgument("aggregate: delta must be nonnegative");
  std::vector<std::vector<Index>> by_top(g.height);
  for (Index j = 0; j < g.count(); ++j) by_top[g.rows[j]].push_back(j);
  GrayImage out(g.height, g.width);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < g.height; ++r) aggregate_row(g, by_top, recon, noisy, delta, r, out);
  } else {
    for (Index r = 0; r < g.height; ++r) aggregate_row(g, by_top, recon, noisy, delta, r, out);
  }
  return out;
}

}  // namespace

GrayImage aggregate_patches(const PatchGrid& grid, const Matrix& recon, const GrayImage& noisy, double delta) {
  return aggregate(grid, recon, noisy, delta, true);
}

GrayImage aggregate_patches_serial(const PatchGrid& grid, const Matrix& recon, const GrayImage& noisy,
                                   double delta) {
  return aggregate(grid, recon, noisy, delta, false);
}

Matrix dct_dictionary(Index p, Index atoms) {
  const auto k = Index(std::llround(std::sqrt(double(atoms))));
  if (k * k != atoms || k < p) throw InvalidArgument("dct_dictionary: atoms must be a square >= p^2");
  Matrix d1(p, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < p; ++i) d1(i, j) = std::cos(double(i * j) * std::numbers::pi / double(k));
    if (j > 0) d1.col(j).array() -= d1.col(j).mean();
    d1.col(j).normalize();
  }
  // atom (a, b) is the outer product d1_a d1_b^T, vectorized row-major
  Matrix d(p * p, atoms);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b)
      for (Index r = 0; r < p; ++r)
        for (Index c = 0; c < p; ++c) d(r * p + c, a * k + b) = d1(r, a) * d1(c, b);
  return d;
}

DenoiseReport denoise_image(const GrayImage& noisy, const DenoiseOptions& opt) {
  if (!(opt.sigma > 0.0)) throw InvalidArgument("denoise: sigma must be positive");
  if (!all_finite(noisy.pixels)) throw InvalidArgument("denoise: non-finite pixels");
  if (opt.sweeps < 1) throw InvalidArgument("denoise: sweeps must be >= 1");
  const double delta = opt.delta < 0.0 ? 30.0 / opt.sigma : opt.delta;
  const Index p = opt.patch;
  PatchGrid grid = extract_patches(noisy, p, opt.stride);

  // code zero-mean patches, add the DC back afterwards
  Matrix z = grid.patches;
  const Vector dc = z.colwise().mean().transpose();
  z.rowwise() -= dc.transpose();

  KsvdOptions ko;
  ko.num_atoms = opt.atoms;
  ko.sweeps = opt.sweeps;
  ko.error_bound = opt.gain * opt.sigma * double(p);
  ko.parallel = opt.parallel;
  LearnedDictionary learned = ksvd_run(z, dct_dictionary(p, opt.atoms), ko);

  DenoiseReport rep;
  rep.flags = learned.flags;
  const Matrix& d = learned.dict.atoms();
  const Index max_atoms = std::min(d.rows(), d.cols());
  const Matrix codes = opt.parallel ? batch_omp(d, z, max_atoms, 0.0, ko.error_bound, &rep.flags)
                                    : batch_omp_serial(d, z, max_atoms, 0.0, ko.error_bound, &rep.flags);
  Matrix recon = d * codes;
  rep.worst_stop_ratio = (recon - z).colwise().norm().maxCoeff() / ko.error_bound;
  recon.rowwise() += dc.transpose();

  rep.image = aggregate(grid, recon, noisy, delta, opt.parallel);
  rep.image.pixels = rep.image.pixels.cwiseMax(0.0).cwiseMin(255.0);
  rep.dict = learned.dict;
  rep.objective_trace = std::move(learned.objective_trace);
  return rep;
}

}  // namespace sparse
