#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace hideseek::nn {

enum class LayerKind { Conv = 0, TransposedConv = 1, FullyConnected = 2, MaxPool = 3, Dropout = 4, Activation = 5 };
enum class ActivationKind { LeakyRelu = 0, Sigmoid = 1, Relu = 2 };

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int in = 0;  // channels, or features for FullyConnected
  int out = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  float rate = 0.0f;  // dropout
  ActivationKind activation = ActivationKind::LeakyRelu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

LayerSpec conv(int in, int out, int kernel, int stride, int padding);
LayerSpec tconv(int in, int out, int kernel, int stride, int padding);
LayerSpec fc(int in, int out);
LayerSpec maxpool(int size = 2);
LayerSpec dropout(float rate);
LayerSpec activation(ActivationKind kind);

// Output shape under standard shape arithmetic; ShapeMismatch when the input
// does not fit or a spatial dimension would become non-positive.
Shape output_shape(const LayerSpec& spec, Shape in);

template <class Real>
struct Param {
  std::vector<Real> value;
  std::vector<Real> grad;
};

template <class Real>
class Layer {
 public:
  using T = Tensor<Real>;
  virtual ~Layer() = default;
  const LayerSpec& spec() const { return spec_; }
  // Caches what backward needs.
  virtual T forward(const T& x, bool train) = 0;
  // Accumulates parameter gradients and returns the input gradient.
  virtual T backward(const T& grad_out) = 0;
  virtual std::vector<Param<Real>*> params() { return {}; }
  virtual void clear_cache() = 0;

 protected:
  explicit Layer(LayerSpec spec) : spec_(spec) {}
  LayerSpec spec_;
};

// Builds a layer with seeded fan-in-scaled uniform weights and zero biases.
// Dropout layers draw their masks from `seed` as well.
template <class Real>
std::unique_ptr<Layer<Real>> make_layer(const LayerSpec& spec, std::uint64_t seed);

// Column buffer for a k x k window with stride and zero padding; column index
// is the output position.
template <class Real>
void im2col(const Real* x, int c, int h, int w, int k, int s, int p, int ho, int wo, Real* col);
template <class Real>
void col2im(const Real* col, int c, int h, int w, int k, int s, int p, int ho, int wo, Real* x);

}  // namespace hideseek::nn
