#include "nn/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hideseek::nn {

template <class Real>
Sequential<Real>::Sequential(int channels, int height, int width, const std::vector<LayerSpec>& specs,
                             std::uint64_t seed)
    : in_c_(channels), in_h_(height), in_w_(width), specs_(specs) {
  if (channels <= 0 || height <= 0 || width <= 0) fail(Errc::InvalidArgument, "input dims must be positive");
  Shape s = input_shape(1);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    s = nn::output_shape(specs[i], s);
    layers_.push_back(make_layer<Real>(specs[i], mix_seed(seed, i)));
  }
}

template <class Real>
Shape Sequential<Real>::output_shape(int batch) const {
  Shape s = input_shape(batch);
  for (const auto& spec : specs_) s = nn::output_shape(spec, s);
  return s;
}

template <class Real>
typename Sequential<Real>::T Sequential<Real>::forward(const T& x, bool train) {
  if (x.shape.n <= 0) fail(Errc::ShapeMismatch, "empty batch");
  require_shape(x.shape, input_shape(x.shape.n), "model input");
  require_finite(x.data, "input");
  T h = x;
  for (auto& layer : layers_) {
    h = layer->forward(h, train);
    require_finite(h.data, "layer forward");
  }
  cached_ = true;
  return h;
}

template <class Real>
typename Sequential<Real>::T Sequential<Real>::backward(const T& grad_out) {
  if (!cached_) fail(Errc::NoCachedForward, "backward called without a cached forward pass");
  T g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  for (auto* p : params()) require_finite(p->grad, "backward");
  return g;
}

template <class Real>
std::vector<Param<Real>*> Sequential<Real>::params() {
  std::vector<Param<Real>*> out;
  for (auto& layer : layers_) {
    for (auto* p : layer->params()) out.push_back(p);
  }
  return out;
}

template <class Real>
std::size_t Sequential<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    for (auto* p : layer->params()) n += p->value.size();
  }
  return n;
}

template <class Real>
void Sequential<Real>::zero_grad() {
  for (auto* p : params()) std::fill(p->grad.begin(), p->grad.end(), Real(0));
}

template <class Real>
void Sequential<Real>::clear_cache() {
  for (auto& layer : layers_) layer->clear_cache();
  cached_ = false;
}

template <class Real>
long long Sequential<Real>::forward_macs() const {
  long long macs = 0;
  Shape s = input_shape(1);
  for (const auto& spec : specs_) {
    const Shape o = nn::output_shape(spec, s);
    switch (spec.kind) {
      case LayerKind::Conv:
        macs += static_cast<long long>(o.c) * o.h * o.w * spec.in * spec.kernel * spec.kernel;
        break;
      case LayerKind::TransposedConv:
        macs += static_cast<long long>(s.h) * s.w * spec.in * spec.out * spec.kernel * spec.kernel;
        break;
      case LayerKind::FullyConnected:
        macs += static_cast<long long>(spec.in) * spec.out;
        break;
      default:
        break;
    }
    s = o;
  }
  return macs;
}

template class Sequential<float>;
template class Sequential<double>;

namespace {

constexpr char kMagic[4] = {'H', 'S', 'N', 'N'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Reader {
  const std::vector<std::uint8_t>& in;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > in.size()) fail(Errc::FormatVersionMismatch, "truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  int i32() { return static_cast<int>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(Sequential<float>& model, const std::string& metadata) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  const Shape in = model.input_shape(1);
  put_u32(out, static_cast<std::uint32_t>(in.c));
  put_u32(out, static_cast<std::uint32_t>(in.h));
  put_u32(out, static_cast<std::uint32_t>(in.w));
  put_u32(out, static_cast<std::uint32_t>(model.specs().size()));
  for (const auto& s : model.specs()) {
    put_u32(out, static_cast<std::uint32_t>(s.kind));
    put_u32(out, static_cast<std::uint32_t>(s.in));
    put_u32(out, static_cast<std::uint32_t>(s.out));
    put_u32(out, static_cast<std::uint32_t>(s.kernel));
    put_u32(out, static_cast<std::uint32_t>(s.stride));
    put_u32(out, static_cast<std::uint32_t>(s.padding));
    put_u32(out, std::bit_cast<std::uint32_t>(s.rate));
    put_u32(out, static_cast<std::uint32_t>(s.activation));
  }
  put_u32(out, static_cast<std::uint32_t>(metadata.size()));
  out.insert(out.end(), metadata.begin(), metadata.end());
  const auto params = model.params();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (auto* p : params) {
    put_u32(out, static_cast<std::uint32_t>(p->value.size()));
    for (float v : p->value) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(Errc::FormatVersionMismatch, "not a model checkpoint");
  }
  Reader r{bytes, 4};
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    fail(Errc::FormatVersionMismatch, "checkpoint version " + std::to_string(version) + " is not supported");
  }
  const int c = r.i32();
  const int h = r.i32();
  const int w = r.i32();
  const std::uint32_t n_layers = r.u32();
  if (n_layers > 4096) fail(Errc::FormatVersionMismatch, "implausible layer count");
  std::vector<LayerSpec> specs;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec s;
    const std::uint32_t kind = r.u32();
    if (kind > static_cast<std::uint32_t>(LayerKind::Activation)) fail(Errc::FormatVersionMismatch, "bad layer kind");
    s.kind = static_cast<LayerKind>(kind);
    s.in = r.i32();
    s.out = r.i32();
    s.kernel = r.i32();
    s.stride = r.i32();
    s.padding = r.i32();
    s.rate = r.f32();
    const std::uint32_t act = r.u32();
    if (act > static_cast<std::uint32_t>(ActivationKind::Relu)) fail(Errc::FormatVersionMismatch, "bad activation");
    s.activation = static_cast<ActivationKind>(act);
    specs.push_back(s);
  }
  const std::uint32_t meta_len = r.u32();
  if (r.pos + meta_len > bytes.size()) fail(Errc::FormatVersionMismatch, "truncated checkpoint");
  Checkpoint ck;
  ck.metadata.assign(reinterpret_cast<const char*>(bytes.data() + r.pos), meta_len);
  r.pos += meta_len;
  ck.model = Sequential<float>(c, h, w, specs, 0);
  auto params = ck.model.params();
  if (r.u32() != params.size()) fail(Errc::FormatVersionMismatch, "checkpoint parameter count mismatch");
  for (auto* p : params) {
    if (r.u32() != p->value.size()) fail(Errc::FormatVersionMismatch, "checkpoint parameter size mismatch");
    for (auto& v : p->value) v = r.f32();
  }
  if (r.pos != bytes.size()) fail(Errc::FormatVersionMismatch, "trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(Sequential<float>& model, const std::string& metadata, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model, metadata);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(Errc::Io, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace hideseek::nn
