#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include "sparse/error.hpp"
#include "sparse/image.hpp"

namespace sparse {

Vector GrayImage::flatten() const {
  Vector v(pixels.size());
  for (Index r = 0; r < height(); ++r)
    for (Index c = 0; c < width(); ++c) v[r * width() + c] = pixels(r, c);
  return v;
}

namespace {

long read_header_int(std::istream& in) {
  int ch;
  for (;;) {
    ch = in.peek();
    if (ch == '#') {
      in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      in.get();
    } else {
      break;
    }
  }
  long v = -1;
  if (!(in >> v) || v < 0) throw DataError("pgm: malformed header");
  return v;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5') throw DataError("pgm: not a binary P5 file");
  const long w = read_header_int(in);
  const long h = read_header_int(in);
  const long maxval = read_header_int(in);
  if (w < 1 || h < 1) throw DataError("pgm: empty image");
  if (maxval < 1 || maxval > 255) throw DataError("pgm: only 8-bit images are supported");
  const int sep = in.get();
  if (sep != ' ' && sep != '\t' && sep != '\n' && sep != '\r') throw DataError("pgm: malformed header");
  std::vector<unsigned char> buf(std::size_t(w) * std::size_t(h));
  if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size())))
    throw DataError("pgm: truncated pixel data");
  GrayImage img(h, w);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) img(r, c) = buf[std::size_t(r * w + c)];
  return img;
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  return read_pgm(f);
}

void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> buf(std::size_t(img.pixels.size()));
  for (Index r = 0; r < img.height(); ++r)
    for (Index c = 0; c < img.width(); ++c)
      buf[std::size_t(r * img.width() + c)] = (unsigned char)std::clamp(std::lround(img(r, c)), 0L, 255L);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw DataError("pgm: write failed");
}

void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  write_pgm(f, img);
}

GrayImage resize_bilinear(const GrayImage& img, Index height, Index width) {
  if (height < 1 || width < 1) throw InvalidArgument("resize: target size must be positive");
  if (height == img.height() && width == img.width()) return img;
  const double sy = double(img.height()) / double(height);
  const double sx = double(img.width()) / double(width);
  GrayImage out(height, width);
  // pixel centres aligned, edges clamped
  auto coord = [](double pos, Index n, Index& i0, Index& i1, double& t) {
    pos = std::clamp(pos, 0.0, double(n - 1));
    i0 = Index(std::floor(pos));
    i1 = std::min(i0 + 1, n - 1);
    t = pos - double(i0);
  };
  for (Index r = 0; r < height; ++r) {
    Index r0, r1;
    double tr;
    coord((double(r) + 0.5) * sy - 0.5, img.height(), r0, r1, tr);
    for (Index c = 0; c < width; ++c) {
      Index c0, c1;
      double tc;
      coord((double(c) + 0.5) * sx - 0.5, img.width(), c0, c1, tc);
      const double top = (1.0 - tc) * img(r0, c0) + tc * img(r0, c1);
      const double bot = (1.0 - tc) * img(r1, c0) + tc * img(r1, c1);
      out(r, c) = (1.0 - tr) * top + tr * bot;
    }
  }
  return out;
}

double psnr(const GrayImage& a, const GrayImage& reference) {
  if (a.height() != reference.height() || a.width() != reference.width())
    throw InvalidArgument("psnr: size mismatch");
  const double mse = (a.pixels - reference.pixels).squaredNorm() / double(a.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace sparse
