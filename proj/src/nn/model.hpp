#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "nn/layers.hpp"

namespace hideseek::nn {

// A feed-forward stack of layers over a fixed per-item input shape.
template <class Real>
class Sequential {
 public:
  using T = Tensor<Real>;

  Sequential() = default;
  // Layer i is initialized from mix_seed(seed, i).
  Sequential(int channels, int height, int width, const std::vector<LayerSpec>& specs, std::uint64_t seed);

  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  Shape input_shape(int batch) const { return {batch, in_c_, in_h_, in_w_}; }
  Shape output_shape(int batch) const;
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer<Real>& layer(std::size_t i) { return *layers_[i]; }

  // Dropout is active only when `train` is set. Non-finite activations raise
  // NonFiniteValue.
  T forward(const T& x, bool train);
  // Accumulates parameter gradients for the last forward pass and returns the
  // input gradient.
  T backward(const T& grad_out);

  std::vector<Param<Real>*> params();
  std::size_t parameter_count() const;
  void zero_grad();
  void clear_cache();
  // Multiply-accumulate operations of one forward pass for one item.
  long long forward_macs() const;

 private:
  int in_c_ = 0;
  int in_h_ = 0;
  int in_w_ = 0;
  std::vector<LayerSpec> specs_;
  std::vector<std::unique_ptr<Layer<Real>>> layers_;
  bool cached_ = false;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned binary checkpoint: magic "HSNN", u32 version, input dims, layer
// specs, a JSON metadata string, then little-endian float32 parameter blobs.
struct Checkpoint {
  Sequential<float> model;
  std::string metadata;  // JSON text
};

void save_checkpoint(Sequential<float>& model, const std::string& metadata, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_checkpoint(Sequential<float>& model, const std::string& metadata);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hideseek::nn
