#pragma once

#include <cstdint>
#include <vector>

#include "sparse/image.hpp"
#include "sparse/problem.hpp"

namespace sparse {

struct PatchGrid {
  Index patch = 8;
  Index stride = 1;
  Index height = 0, width = 0;  // source image size
  Matrix patches;               // p^2 x M, row-major vectorized blocks
  std::vector<Index> rows, cols;  // top-left corner of column j

  Index count() const { return patches.cols(); }
};

// 0, s, 2s, ... plus n - p when the stride skips the last position
std::vector<Index> patch_positions(Index n, Index p, Index stride);

PatchGrid extract_patches(const GrayImage& img, Index p, Index stride);

// (sum_i P_i^T z_i + delta * y) / (coverage + delta), pixelwise; recon has the grid's layout
GrayImage aggregate_patches(const PatchGrid& grid, const Matrix& recon, const GrayImage& noisy,
                            double delta);
GrayImage aggregate_patches_serial(const PatchGrid& grid, const Matrix& recon,
                                   const GrayImage& noisy, double delta);

// separable overcomplete DCT, atoms must be a perfect square
Matrix dct_dictionary(Index p, Index atoms);

struct DenoiseOptions {
  double sigma = 25.0;
  Index patch = 8;
  Index stride = 1;
  Index atoms = 256;
  std::size_t sweeps = 10;
  double gain = 1.15;   // per-patch stop ||D a - z|| <= gain * sigma * patch
  double delta = -1.0;  // < 0 means 30 / sigma
  bool parallel = true;
};

struct DenoiseReport {
  GrayImage image;
  Dictionary dict;
  std::vector<double> objective_trace;
  double worst_stop_ratio = 0.0;  // max over patches of ||D a - z|| / (gain sigma p)
  unsigned flags = 0;
};

DenoiseReport denoise_image(const GrayImage& noisy, const DenoiseOptions& opt = {});

}  // namespace sparse
