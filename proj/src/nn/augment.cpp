#include "nn/augment.hpp"

#include "common/rng.hpp"

namespace hideseek::nn {

namespace {

// Destination of (r, c) after `k` quarter turns in an n x n grid.
inline void turn(int n, int k, int r, int c, int& rr, int& cc) {
  switch (k & 3) {
    case 0: rr = r, cc = c; break;
    case 1: rr = c, cc = n - 1 - r; break;
    case 2: rr = n - 1 - r, cc = n - 1 - c; break;
    default: rr = n - 1 - c, cc = r; break;
  }
}

}  // namespace

perception::Raster rotate90(const perception::Raster& r, int quarter_turns) {
  if (r.width != r.height) fail(Errc::NonSquareRaster, "rotation needs a square raster");
  const int n = r.width;
  perception::Raster out(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      int rr = 0;
      int cc = 0;
      turn(n, quarter_turns, row, col, rr, cc);
      out.set(rr, cc, r.at(row, col));
    }
  }
  return out;
}

int augment_rotate(std::span<perception::Raster*> rasters, std::uint64_t seed) {
  for (const auto* r : rasters) {
    if (r->width != r->height) fail(Errc::NonSquareRaster, "rotation needs square rasters");
  }
  Rng rng(seed);
  const int k = 1 + static_cast<int>(rng.below(3));
  for (auto* r : rasters) *r = rotate90(*r, k);
  return k;
}

template <class Real>
void rotate90_item(Tensor<Real>& t, int n, int quarter_turns) {
  if (t.shape.h != t.shape.w) fail(Errc::NonSquareRaster, "rotation needs square planes");
  const int k = quarter_turns & 3;
  if (k == 0) return;
  const int size = t.shape.h;
  std::vector<Real> plane(static_cast<std::size_t>(size) * size);
  for (int c = 0; c < t.shape.c; ++c) {
    Real* p = t.item(n) + static_cast<std::size_t>(c) * size * size;
    for (int r = 0; r < size; ++r) {
      for (int col = 0; col < size; ++col) {
        int rr = 0;
        int cc = 0;
        turn(size, k, r, col, rr, cc);
        plane[static_cast<std::size_t>(rr) * size + cc] = p[static_cast<std::size_t>(r) * size + col];
      }
    }
    std::copy(plane.begin(), plane.end(), p);
  }
}

template void rotate90_item<float>(Tensor<float>&, int, int);
template void rotate90_item<double>(Tensor<double>&, int, int);

}  // namespace hideseek::nn
