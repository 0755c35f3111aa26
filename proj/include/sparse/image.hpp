#pragma once

#include <iosfwd>
#include <string>

#include "sparse/linalg.hpp"

namespace sparse {

// row-major grid of gray levels, nominal range [0, 255]
struct GrayImage {
  Matrix pixels;  // height x width

  GrayImage() = default;
  explicit GrayImage(Matrix p) : pixels(std::move(p)) {}
  GrayImage(Index h, Index w, double fill = 0.0) : pixels(Matrix::Constant(h, w, fill)) {}

  Index height() const { return pixels.rows(); }
  Index width() const { return pixels.cols(); }
  double& operator()(Index r, Index c) { return pixels(r, c); }
  double operator()(Index r, Index c) const { return pixels(r, c); }
  // row-major vectorization
  Vector flatten() const;
};

// binary P5 with maxval <= 255; writing rounds and clamps to [0, 255]
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::string& path);
void write_pgm(std::ostream& out, const GrayImage& img);
void write_pgm(const std::string& path, const GrayImage& img);

GrayImage resize_bilinear(const GrayImage& img, Index height, Index width);

double psnr(const GrayImage& a, const GrayImage& reference);

}  // namespace sparse
