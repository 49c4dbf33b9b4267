#include "models/architectures.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "models/features.hpp"

namespace hideseek::models {

namespace {

int scaled(int channels, double width) { return std::max(4, static_cast<int>(std::lround(channels * width))); }

}  // namespace

std::vector<nn::LayerSpec> vpt_architecture(int resolution, double width) {
  if (resolution < 16 || resolution % 16 != 0) fail(Errc::InvalidArgument, "resolution must be a multiple of 16");
  if (!(width > 0.0)) fail(Errc::InvalidArgument, "width multiplier must be positive");
  using nn::ActivationKind;
  std::vector<nn::LayerSpec> s;
  const int enc[8] = {16, 32, 32, 64, 64, 128, 128, 256};
  int in = kVptInputChannels;
  for (int i = 0; i < 8; ++i) {
    const int out = scaled(enc[i], width);
    s.push_back(nn::conv(in, out, 3, i % 2 == 0 ? 2 : 1, 1));
    s.push_back(nn::activation(ActivationKind::LeakyRelu));
    in = out;
  }
  const int dec[4] = {128, 64, 32, 16};
  for (int i = 0; i < 4; ++i) {
    const int mid = scaled(dec[i], width);
    s.push_back(nn::tconv(in, mid, 4, 2, 1));
    s.push_back(nn::activation(ActivationKind::LeakyRelu));
    const int out = i == 3 ? kFrameChannels : mid;
    s.push_back(nn::conv(mid, out, 3, 1, 1));
    s.push_back(nn::activation(i == 3 ? ActivationKind::Sigmoid : ActivationKind::LeakyRelu));
    in = out;
  }
  return s;
}

std::vector<nn::LayerSpec> vpn_architecture(int resolution, int in_channels, double width, float dropout_rate) {
  if (resolution < 8 || resolution % 8 != 0) fail(Errc::InvalidArgument, "resolution must be a multiple of 8");
  using nn::ActivationKind;
  std::vector<nn::LayerSpec> s;
  int in = in_channels;
  for (int c : {16, 32, 64}) {
    const int out = scaled(c, width);
    s.push_back(nn::conv(in, out, 3, 1, 1));
    s.push_back(nn::activation(ActivationKind::LeakyRelu));
    s.push_back(nn::maxpool(2));
    in = out;
  }
  const int side = resolution / 8;
  const int hidden = scaled(128, width);
  s.push_back(nn::fc(in * side * side, hidden));
  s.push_back(nn::activation(ActivationKind::LeakyRelu));
  s.push_back(nn::dropout(dropout_rate));
  s.push_back(nn::fc(hidden, 1));
  s.push_back(nn::activation(ActivationKind::Sigmoid));
  return s;
}

}  // namespace hideseek::models
