#include "models/features.hpp"

#include "perception/render.hpp"

namespace hideseek::models {

void write_channels(const perception::Raster& r, Tensor& t, int n, int offset, int channels) {
  if (r.width != t.shape.w || r.height != t.shape.h) {
    fail(Errc::ShapeMismatch, "raster " + std::to_string(r.width) + "x" + std::to_string(r.height) +
                                  " does not match model input " + nn::to_string(t.shape));
  }
  if (offset + channels > t.shape.c) fail(Errc::ShapeMismatch, "channel offset out of range");
  const int plane = r.width * r.height;
  float* base = t.item(n);
  for (int c = 0; c < channels; ++c) {
    float* dst = base + static_cast<std::size_t>(offset + c) * plane;
    for (int i = 0; i < plane; ++i) dst[i] = r.rgba[static_cast<std::size_t>(i) * 4 + c] * (1.0f / 255.0f);
  }
}

void write_vpt_input(const perception::Raster& i_h0, const perception::ActionEmbedding& actions, Tensor& t, int n) {
  write_channels(i_h0, t, n, 0, 4);
  write_channels(actions.visitation, t, n, 4, 4);
  write_channels(actions.recency, t, n, 8, 4);
}

perception::Raster quantize(const Tensor& t, int n) {
  if (t.shape.c < 3) fail(Errc::ShapeMismatch, "quantize needs three colour planes");
  const int plane = t.shape.h * t.shape.w;
  perception::Raster out(t.shape.w, t.shape.h);
  const float* src = t.item(n);
  for (int i = 0; i < plane; ++i) {
    const auto cls = perception::nearest_palette_class(src[i] * 255.0f, src[plane + i] * 255.0f,
                                                       src[2 * plane + i] * 255.0f);
    const auto& c = perception::kPaletteColors[static_cast<std::size_t>(cls)];
    std::copy(c.begin(), c.end(), out.rgba.begin() + static_cast<std::ptrdiff_t>(i) * 4);
  }
  return out;
}

Tensor item_copy(const Tensor& t, int n) {
  Tensor out({1, t.shape.c, t.shape.h, t.shape.w});
  std::copy(t.item(n), t.item(n) + t.shape.per_item(), out.data.begin());
  return out;
}

}  // namespace hideseek::models
