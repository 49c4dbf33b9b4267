#pragma once

#include <vector>

#include "nn/tensor.hpp"
#include "perception/action_embedding.hpp"
#include "perception/raster.hpp"

namespace hideseek::models {

using Tensor = nn::Tensor<float>;

// Writes `channels` (3 = RGB, 4 = RGBA) of `r`, scaled to [0, 1], into item
// `n` starting at channel `offset`.
void write_channels(const perception::Raster& r, Tensor& t, int n, int offset, int channels);

// Network input: RGBA of I_H0, F and T concatenated channel-wise (12 planes).
inline constexpr int kVptInputChannels = 12;
inline constexpr int kFrameChannels = 3;
void write_vpt_input(const perception::Raster& i_h0, const perception::ActionEmbedding& actions, Tensor& t, int n);

// Soft RGB frame of item `n` quantized to the nearest palette colour.
perception::Raster quantize(const Tensor& t, int n);

// RGB planes of item `n` as a standalone one-item tensor.
Tensor item_copy(const Tensor& t, int n);

}  // namespace hideseek::models
