#pragma once

#include <cstdint>
#include <span>

#include "nn/tensor.hpp"
#include "perception/raster.hpp"

namespace hideseek::nn {

// Counter-clockwise in image coordinates: one quarter turn sends pixel
// (r, c) of an n x n raster to (c, n - 1 - r).
perception::Raster rotate90(const perception::Raster& r, int quarter_turns);

// Rotates every raster by the same angle drawn from {90, 180, 270} degrees
// and returns the number of quarter turns. NonSquareRaster for non-square
// inputs.
int augment_rotate(std::span<perception::Raster*> rasters, std::uint64_t seed);

// Same rotation applied to every channel of batch item `n`.
template <class Real>
void rotate90_item(Tensor<Real>& t, int n, int quarter_turns);

}  // namespace hideseek::nn
