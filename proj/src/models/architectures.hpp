#pragma once

#include <vector>

#include "nn/layers.hpp"

namespace hideseek::models {

// Encoder of eight 3x3 convolutions (stride 2 on every other layer, 16 to 256
// channels before scaling), decoder of four [4x4 stride-2 transposed conv,
// 3x3 conv] blocks, sigmoid RGB output. `width` scales every channel count.
std::vector<nn::LayerSpec> vpt_architecture(int resolution, double width = 1.0);

// Three [3x3 conv, leaky ReLU, 2x2 max-pool] blocks, FC 128, dropout, FC 1,
// sigmoid.
std::vector<nn::LayerSpec> vpn_architecture(int resolution, int in_channels = 3, double width = 1.0,
                                            float dropout_rate = 0.5f);

}  // namespace hideseek::models
