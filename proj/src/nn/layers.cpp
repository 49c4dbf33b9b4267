#include "nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hideseek::nn {

std::string to_string(Shape s) {
  return "[" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + "]";
}

LayerSpec conv(int in, int out, int kernel, int stride, int padding) {
  return {LayerKind::Conv, in, out, kernel, stride, padding, 0.0f, ActivationKind::LeakyRelu};
}
LayerSpec tconv(int in, int out, int kernel, int stride, int padding) {
  return {LayerKind::TransposedConv, in, out, kernel, stride, padding, 0.0f, ActivationKind::LeakyRelu};
}
LayerSpec fc(int in, int out) { return {LayerKind::FullyConnected, in, out, 1, 1, 0, 0.0f, ActivationKind::LeakyRelu}; }
LayerSpec maxpool(int size) { return {LayerKind::MaxPool, 0, 0, size, size, 0, 0.0f, ActivationKind::LeakyRelu}; }
LayerSpec dropout(float rate) { return {LayerKind::Dropout, 0, 0, 1, 1, 0, rate, ActivationKind::LeakyRelu}; }
LayerSpec activation(ActivationKind kind) { return {LayerKind::Activation, 0, 0, 1, 1, 0, 0.0f, kind}; }

Shape output_shape(const LayerSpec& spec, Shape in) {
  Shape out = in;
  switch (spec.kind) {
    case LayerKind::Conv:
      if (in.c != spec.in) fail(Errc::ShapeMismatch, "conv expects " + std::to_string(spec.in) + " channels");
      out.c = spec.out;
      out.h = (in.h + 2 * spec.padding - spec.kernel) / spec.stride + 1;
      out.w = (in.w + 2 * spec.padding - spec.kernel) / spec.stride + 1;
      if (in.h + 2 * spec.padding < spec.kernel || in.w + 2 * spec.padding < spec.kernel) out.h = out.w = 0;
      break;
    case LayerKind::TransposedConv:
      if (in.c != spec.in) fail(Errc::ShapeMismatch, "tconv expects " + std::to_string(spec.in) + " channels");
      out.c = spec.out;
      out.h = (in.h - 1) * spec.stride - 2 * spec.padding + spec.kernel;
      out.w = (in.w - 1) * spec.stride - 2 * spec.padding + spec.kernel;
      break;
    case LayerKind::FullyConnected:
      if (in.per_item() != spec.in) {
        fail(Errc::ShapeMismatch, "fully connected expects " + std::to_string(spec.in) + " features, got " +
                                      std::to_string(in.per_item()));
      }
      out = {in.n, spec.out, 1, 1};
      break;
    case LayerKind::MaxPool:
      out.h = in.h / spec.kernel;
      out.w = in.w / spec.kernel;
      break;
    case LayerKind::Dropout:
    case LayerKind::Activation:
      break;
  }
  if (out.c <= 0 || out.h <= 0 || out.w <= 0) {
    fail(Errc::ShapeMismatch, "layer produces non-positive shape " + to_string(out) + " from " + to_string(in));
  }
  return out;
}

template <class Real>
void im2col(const Real* x, int c, int h, int w, int k, int s, int p, int ho, int wo, Real* col) {
  const int positions = ho * wo;
  for (int ci = 0; ci < c; ++ci) {
    const Real* plane = x + static_cast<std::size_t>(ci) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        Real* row = col + static_cast<std::size_t>((ci * k + ki) * k + kj) * positions;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * s - p + ki;
          Real* dst = row + oh * wo;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + wo, Real(0));
            continue;
          }
          const Real* src = plane + static_cast<std::size_t>(ih) * w;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * s - p + kj;
            dst[ow] = (iw >= 0 && iw < w) ? src[iw] : Real(0);
          }
        }
      }
    }
  }
}

template <class Real>
void col2im(const Real* col, int c, int h, int w, int k, int s, int p, int ho, int wo, Real* x) {
  const int positions = ho * wo;
  std::fill(x, x + static_cast<std::size_t>(c) * h * w, Real(0));
  for (int ci = 0; ci < c; ++ci) {
    Real* plane = x + static_cast<std::size_t>(ci) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const Real* row = col + static_cast<std::size_t>((ci * k + ki) * k + kj) * positions;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * s - p + ki;
          if (ih < 0 || ih >= h) continue;
          Real* dst = plane + static_cast<std::size_t>(ih) * w;
          const Real* src = row + oh * wo;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * s - p + kj;
            if (iw >= 0 && iw < w) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

namespace {

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class Real>
using MapM = Eigen::Map<Mat<Real>>;
template <class Real>
using CMapM = Eigen::Map<const Mat<Real>>;
template <class Real>
using CMapV = Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>>;
template <class Real>
using MapV = Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>>;

template <class Real>
void init_uniform(Param<Real>& p, std::size_t n, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / std::max(1, fan_in));
  p.value.resize(n);
  for (auto& v : p.value) v = static_cast<Real>(rng.uniform(-bound, bound));
  p.grad.assign(n, Real(0));
}

// Row sums of a row-major rows x cols block added into out, in a fixed
// summation order. Eigen's vectorized reductions peel by address alignment,
// which would make results depend on where buffers happen to be allocated.
template <class Real>
void add_row_sums(const Real* m, int rows, int cols, Real* out) {
  for (int r = 0; r < rows; ++r) {
    const Real* row = m + static_cast<std::size_t>(r) * cols;
    Real acc = 0;
    for (int c = 0; c < cols; ++c) acc += row[c];
    out[r] += acc;
  }
}

template <class Real>
void init_zero(Param<Real>& p, std::size_t n) {
  p.value.assign(n, Real(0));
  p.grad.assign(n, Real(0));
}

template <class Real>
void require_cache(const Tensor<Real>& cache) {
  if (cache.data.empty()) fail(Errc::NoCachedForward, "backward called without a cached forward pass");
}

template <class Real>
class Conv final : public Layer<Real> {
 public:
  using T = Tensor<Real>;
  Conv(LayerSpec spec, Rng& rng) : Layer<Real>(spec) {
    const int fan_in = spec.in * spec.kernel * spec.kernel;
    init_uniform(weight_, static_cast<std::size_t>(spec.out) * fan_in, fan_in, rng);
    init_zero(bias_, spec.out);
  }

  T forward(const T& x, bool) override {
    const auto& s = this->spec_;
    const Shape os = output_shape(s, x.shape);
    const int kk = s.in * s.kernel * s.kernel;
    const int positions = os.h * os.w;
    T y(os);
    std::vector<Real> col(static_cast<std::size_t>(kk) * positions);
    CMapM<Real> W(weight_.value.data(), s.out, kk);
    CMapV<Real> b(bias_.value.data(), s.out);
    for (int n = 0; n < x.shape.n; ++n) {
      im2col(x.item(n), s.in, x.shape.h, x.shape.w, s.kernel, s.stride, s.padding, os.h, os.w, col.data());
      MapM<Real> Y(y.item(n), s.out, positions);
      Y.noalias() = W * CMapM<Real>(col.data(), kk, positions);
      Y.colwise() += b;
    }
    input_ = x;
    return y;
  }

  T backward(const T& g) override {
    require_cache(input_);
    const auto& s = this->spec_;
    const Shape is = input_.shape;
    require_shape(g.shape, output_shape(s, is), "conv backward");
    const int kk = s.in * s.kernel * s.kernel;
    const int positions = g.shape.h * g.shape.w;
    T dx(is);
    std::vector<Real> col(static_cast<std::size_t>(kk) * positions);
    std::vector<Real> dcol(col.size());
    CMapM<Real> W(weight_.value.data(), s.out, kk);
    MapM<Real> dW(weight_.grad.data(), s.out, kk);
    for (int n = 0; n < is.n; ++n) {
      im2col(input_.item(n), s.in, is.h, is.w, s.kernel, s.stride, s.padding, g.shape.h, g.shape.w, col.data());
      CMapM<Real> G(g.item(n), s.out, positions);
      dW.noalias() += G * CMapM<Real>(col.data(), kk, positions).transpose();
      add_row_sums(g.item(n), s.out, positions, bias_.grad.data());
      MapM<Real>(dcol.data(), kk, positions).noalias() = W.transpose() * G;
      col2im(dcol.data(), s.in, is.h, is.w, s.kernel, s.stride, s.padding, g.shape.h, g.shape.w, dx.item(n));
    }
    return dx;
  }

  std::vector<Param<Real>*> params() override { return {&weight_, &bias_}; }
  void clear_cache() override { input_ = T(); }

 private:
  Param<Real> weight_;  // [out, in*k*k]
  Param<Real> bias_;
  T input_;
};

template <class Real>
class TransposedConv final : public Layer<Real> {
 public:
  using T = Tensor<Real>;
  TransposedConv(LayerSpec spec, Rng& rng) : Layer<Real>(spec) {
    const int fan_in = std::max(1, spec.in * spec.kernel * spec.kernel / (spec.stride * spec.stride));
    init_uniform(weight_, static_cast<std::size_t>(spec.in) * spec.out * spec.kernel * spec.kernel, fan_in, rng);
    init_zero(bias_, spec.out);
  }

  T forward(const T& x, bool) override {
    const auto& s = this->spec_;
    const Shape os = output_shape(s, x.shape);
    const int kk = s.out * s.kernel * s.kernel;
    const int positions = x.shape.h * x.shape.w;
    T y(os);
    std::vector<Real> col(static_cast<std::size_t>(kk) * positions);
    CMapM<Real> W(weight_.value.data(), s.in, kk);
    for (int n = 0; n < x.shape.n; ++n) {
      MapM<Real>(col.data(), kk, positions).noalias() = W.transpose() * CMapM<Real>(x.item(n), s.in, positions);
      col2im(col.data(), s.out, os.h, os.w, s.kernel, s.stride, s.padding, x.shape.h, x.shape.w, y.item(n));
      MapM<Real>(y.item(n), s.out, os.h * os.w).colwise() += CMapV<Real>(bias_.value.data(), s.out);
    }
    input_ = x;
    return y;
  }

  T backward(const T& g) override {
    require_cache(input_);
    const auto& s = this->spec_;
    const Shape is = input_.shape;
    require_shape(g.shape, output_shape(s, is), "tconv backward");
    const int kk = s.out * s.kernel * s.kernel;
    const int positions = is.h * is.w;
    T dx(is);
    std::vector<Real> dcol(static_cast<std::size_t>(kk) * positions);
    CMapM<Real> W(weight_.value.data(), s.in, kk);
    MapM<Real> dW(weight_.grad.data(), s.in, kk);
    for (int n = 0; n < is.n; ++n) {
      add_row_sums(g.item(n), s.out, g.shape.h * g.shape.w, bias_.grad.data());
      im2col(g.item(n), s.out, g.shape.h, g.shape.w, s.kernel, s.stride, s.padding, is.h, is.w, dcol.data());
      CMapM<Real> D(dcol.data(), kk, positions);
      CMapM<Real> X(input_.item(n), s.in, positions);
      dW.noalias() += X * D.transpose();
      MapM<Real>(dx.item(n), s.in, positions).noalias() = W * D;
    }
    return dx;
  }

  std::vector<Param<Real>*> params() override { return {&weight_, &bias_}; }
  void clear_cache() override { input_ = T(); }

 private:
  Param<Real> weight_;  // [in, out*k*k]
  Param<Real> bias_;
  T input_;
};

template <class Real>
class FullyConnected final : public Layer<Real> {
 public:
  using T = Tensor<Real>;
  FullyConnected(LayerSpec spec, Rng& rng) : Layer<Real>(spec) {
    init_uniform(weight_, static_cast<std::size_t>(spec.out) * spec.in, spec.in, rng);
    init_zero(bias_, spec.out);
  }

  T forward(const T& x, bool) override {
    const auto& s = this->spec_;
    T y(output_shape(s, x.shape));
    MapM<Real> Y(y.data.data(), x.shape.n, s.out);
    Y.noalias() = CMapM<Real>(x.data.data(), x.shape.n, s.in) * CMapM<Real>(weight_.value.data(), s.out, s.in).transpose();
    Y.rowwise() += CMapV<Real>(bias_.value.data(), s.out).transpose();
    input_ = x;
    return y;
  }

  T backward(const T& g) override {
    require_cache(input_);
    const auto& s = this->spec_;
    require_shape(g.shape, output_shape(s, input_.shape), "fully connected backward");
    const int n = input_.shape.n;
    CMapM<Real> G(g.data.data(), n, s.out);
    CMapM<Real> X(input_.data.data(), n, s.in);
    MapM<Real>(weight_.grad.data(), s.out, s.in).noalias() += G.transpose() * X;
    for (int b = 0; b < n; ++b) {
      const Real* row = g.item(b);
      for (int o = 0; o < s.out; ++o) bias_.grad[static_cast<std::size_t>(o)] += row[o];
    }
    T dx(input_.shape);
    MapM<Real>(dx.data.data(), n, s.in).noalias() = G * CMapM<Real>(weight_.value.data(), s.out, s.in);
    return dx;
  }

  std::vector<Param<Real>*> params() override { return {&weight_, &bias_}; }
  void clear_cache() override { input_ = T(); }

 private:
  Param<Real> weight_;  // [out, in]
  Param<Real> bias_;
  T input_;
};

template <class Real>
class MaxPool final : public Layer<Real> {
 public:
  using T = Tensor<Real>;
  explicit MaxPool(LayerSpec spec) : Layer<Real>(spec) {}

  T forward(const T& x, bool) override {
    const int k = this->spec_.kernel;
    const Shape os = output_shape(this->spec_, x.shape);
    T y(os);
    argmax_.assign(y.size(), 0);
    std::size_t o = 0;
    for (int n = 0; n < os.n; ++n) {
      for (int c = 0; c < os.c; ++c) {
        const std::size_t base = (static_cast<std::size_t>(n) * x.shape.c + c) * x.shape.h * x.shape.w;
        for (int oh = 0; oh < os.h; ++oh) {
          for (int ow = 0; ow < os.w; ++ow, ++o) {
            std::size_t best = base + static_cast<std::size_t>(oh * k) * x.shape.w + ow * k;
            for (int i = 0; i < k; ++i) {
              for (int j = 0; j < k; ++j) {
                const std::size_t idx = base + static_cast<std::size_t>(oh * k + i) * x.shape.w + ow * k + j;
                if (x.data[idx] > x.data[best]) best = idx;
              }
            }
            argmax_[o] = best;
            y.data[o] = x.data[best];
          }
        }
      }
    }
    in_shape_ = x.shape;
    cached_ = true;
    return y;
  }

  T backward(const T& g) override {
    if (!cached_) fail(Errc::NoCachedForward, "backward called without a cached forward pass");
    require_shape(g.shape, output_shape(this->spec_, in_shape_), "maxpool backward");
    T dx(in_shape_);
    for (std::size_t o = 0; o < g.size(); ++o) dx.data[argmax_[o]] += g.data[o];
    return dx;
  }

  void clear_cache() override {
    cached_ = false;
    argmax_.clear();
  }

 private:
  std::vector<std::size_t> argmax_;
  Shape in_shape_;
  bool cached_ = false;
};

template <class Real>
class Dropout final : public Layer<Real> {
 public:
  using T = Tensor<Real>;
  Dropout(LayerSpec spec, std::uint64_t seed) : Layer<Real>(spec), rng_(seed) {
    if (!(spec.rate >= 0.0f && spec.rate < 1.0f)) fail(Errc::InvalidArgument, "dropout rate must be in [0, 1)");
  }

  T forward(const T& x, bool train) override {
    mask_.assign(x.size(), Real(1));
    if (train && this->spec_.rate > 0.0f) {
      const double keep = 1.0 - this->spec_.rate;
      const Real scale = static_cast<Real>(1.0 / keep);
      for (auto& m : mask_) m = rng_.bernoulli(keep) ? scale : Real(0);
    }
    T y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= mask_[i];
    shape_ = x.shape;
    cached_ = true;
    return y;
  }

  T backward(const T& g) override {
    if (!cached_) fail(Errc::NoCachedForward, "backward called without a cached forward pass");
    require_shape(g.shape, shape_, "dropout backward");
    T dx = g;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
  }

  void clear_cache() override {
    cached_ = false;
    mask_.clear();
  }

 private:
  Rng rng_;
  std::vector<Real> mask_;
  Shape shape_;
  bool cached_ = false;
};

template <class Real>
class Activation final : public Layer<Real> {
 public:
  using T = Tensor<Real>;
  explicit Activation(LayerSpec spec) : Layer<Real>(spec) {}

  T forward(const T& x, bool) override {
    T y = x;
    switch (this->spec_.activation) {
      case ActivationKind::LeakyRelu:
        for (auto& v : y.data) v = v > 0 ? v : Real(0.1) * v;
        input_ = x;
        break;
      case ActivationKind::Relu:
        for (auto& v : y.data) v = v > 0 ? v : Real(0);
        input_ = x;
        break;
      case ActivationKind::Sigmoid:
        for (auto& v : y.data) v = Real(1) / (Real(1) + std::exp(-v));
        input_ = y;
        break;
    }
    return y;
  }

  T backward(const T& g) override {
    require_cache(input_);
    require_shape(g.shape, input_.shape, "activation backward");
    T dx = g;
    const auto& c = input_.data;
    switch (this->spec_.activation) {
      case ActivationKind::LeakyRelu:
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= c[i] > 0 ? Real(1) : Real(0.1);
        break;
      case ActivationKind::Relu:
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= c[i] > 0 ? Real(1) : Real(0);
        break;
      case ActivationKind::Sigmoid:
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= c[i] * (Real(1) - c[i]);
        break;
    }
    return dx;
  }

  void clear_cache() override { input_ = T(); }

 private:
  T input_;  // pre-activation, or the output for sigmoid
};

}  // namespace

template <class Real>
std::unique_ptr<Layer<Real>> make_layer(const LayerSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  switch (spec.kind) {
    case LayerKind::Conv:
    case LayerKind::TransposedConv:
    case LayerKind::FullyConnected:
      if (spec.in <= 0 || spec.out <= 0 || spec.kernel <= 0 || spec.stride <= 0 || spec.padding < 0) {
        fail(Errc::InvalidArgument, "layer dimensions must be positive");
      }
      break;
    case LayerKind::MaxPool:
      if (spec.kernel <= 0) fail(Errc::InvalidArgument, "pool size must be positive");
      break;
    default:
      break;
  }
  switch (spec.kind) {
    case LayerKind::Conv: return std::make_unique<Conv<Real>>(spec, rng);
    case LayerKind::TransposedConv: return std::make_unique<TransposedConv<Real>>(spec, rng);
    case LayerKind::FullyConnected: return std::make_unique<FullyConnected<Real>>(spec, rng);
    case LayerKind::MaxPool: return std::make_unique<MaxPool<Real>>(spec);
    case LayerKind::Dropout: return std::make_unique<Dropout<Real>>(spec, seed);
    case LayerKind::Activation: return std::make_unique<Activation<Real>>(spec);
  }
  fail(Errc::InvalidArgument, "unknown layer kind");
}

#define HIDESEEK_INSTANTIATE(Real)                                                                      \
  template std::unique_ptr<Layer<Real>> make_layer<Real>(const LayerSpec&, std::uint64_t);             \
  template void im2col<Real>(const Real*, int, int, int, int, int, int, int, int, Real*);              \
  template void col2im<Real>(const Real*, int, int, int, int, int, int, int, int, Real*);

HIDESEEK_INSTANTIATE(float)
HIDESEEK_INSTANTIATE(double)
#undef HIDESEEK_INSTANTIATE

}  // namespace hideseek::nn
