#include "oracles/oracles.hpp"

#include <cmath>
#include <numbers>
#include <queue>

#include "common/rng.hpp"

namespace hideseek::oracle {

bool less(ExactCost a, ExactCost b) {
  // a.s + a.d r < b.s + b.d r  <=>  (a.s - b.s) < (b.d - a.d) r, r = sqrt(2).
  const long lhs = a.s - b.s;
  const long k = b.d - a.d;
  if (k >= 0) {
    if (lhs < 0) return true;
    return lhs * lhs < 2 * k * k;
  }
  if (lhs >= 0) return false;
  return lhs * lhs > 2 * k * k;
}

std::optional<ExactCost> dijkstra(const sim::NavGrid& grid, sim::Cell start, sim::Cell goal) {
  if (!grid.free(start) || !grid.free(goal)) return std::nullopt;
  const int n = grid.resolution();
  std::vector<std::optional<ExactCost>> dist(static_cast<std::size_t>(n) * n);
  std::vector<char> done(dist.size(), 0);
  auto idx = [n](sim::Cell c) { return static_cast<std::size_t>(c.row * n + c.col); };
  dist[idx(start)] = ExactCost{};
  for (;;) {
    // O(V^2) selection keeps the oracle free of heap tie-break subtleties.
    std::size_t best = dist.size();
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (done[i] || !dist[i]) continue;
      if (best == dist.size() || less(*dist[i], *dist[best])) best = i;
    }
    if (best == dist.size()) return std::nullopt;
    const sim::Cell c{static_cast<int>(best) / n, static_cast<int>(best) % n};
    if (c == goal) return dist[best];
    done[best] = 1;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const sim::Cell nb{c.row + dr, c.col + dc};
        if (!grid.free(nb)) continue;
        const bool diag = dr != 0 && dc != 0;
        if (diag && (!grid.free({c.row + dr, c.col}) || !grid.free({c.row, c.col + dc}))) continue;
        ExactCost cand = *dist[best];
        (diag ? cand.d : cand.s) += 1;
        auto& slot = dist[idx(nb)];
        if (!done[idx(nb)] && (!slot || less(cand, *slot))) slot = cand;
      }
    }
  }
}

std::vector<std::uint8_t> ray_march_visibility(const sim::Pose& pose, const sim::Arena& arena,
                                               const perception::RasterGeometry& geom, double fov_deg) {
  const double half = fov_deg / 2.0;
  const int bins = static_cast<int>(std::lround(fov_deg * 10.0)) + 1;
  std::vector<double> reach(static_cast<std::size_t>(bins));
  const double step = 0.25;
  const double max_len = std::hypot(arena.width_mm, arena.height_mm) + 1.0;
  for (int b = 0; b < bins; ++b) {
    const double a = (pose.heading_deg - half + b * 0.1) * std::numbers::pi / 180.0;
    const double dx = std::cos(a);
    const double dy = std::sin(a);
    double r = 0.0;
    for (; r < max_len; r += step) {
      const double x = pose.x_mm + r * dx;
      const double y = pose.y_mm + r * dy;
      bool hit = x < 0 || y < 0 || x > arena.width_mm || y > arena.height_mm;
      for (const auto& o : arena.obstacles) hit = hit || (x >= o.x0 && x <= o.x1 && y >= o.y0 && y <= o.y1);
      if (hit) break;
    }
    reach[static_cast<std::size_t>(b)] = r;
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(geom.width()) * geom.height(), 0);
  for (int row = 0; row < geom.height(); ++row) {
    for (int col = 0; col < geom.width(); ++col) {
      const double cx = (col + 0.5) * geom.pixel_width_mm();
      const double cy = (row + 0.5) * geom.pixel_height_mm();
      const double dx = cx - pose.x_mm;
      const double dy = cy - pose.y_mm;
      double rel = std::atan2(dy, dx) * 180.0 / std::numbers::pi - pose.heading_deg;
      while (rel > 180.0) rel -= 360.0;
      while (rel <= -180.0) rel += 360.0;
      if (std::abs(rel) > half) continue;
      const int b = static_cast<int>(std::lround((rel + half) * 10.0));
      if (b < 0 || b >= bins) continue;
      if (std::hypot(dx, dy) <= reach[static_cast<std::size_t>(b)]) out[static_cast<std::size_t>(row * geom.width() + col)] = 1;
    }
  }
  return out;
}

namespace {

using T = nn::Tensor<double>;

T naive_layer(nn::Layer<double>& layer, const T& x) {
  const auto& s = layer.spec();
  const nn::Shape os = nn::output_shape(s, x.shape);
  T y(os);
  auto ps = layer.params();
  switch (s.kind) {
    case nn::LayerKind::Conv: {
      const auto& w = ps[0]->value;
      const auto& b = ps[1]->value;
      for (int n = 0; n < os.n; ++n)
        for (int o = 0; o < os.c; ++o)
          for (int i = 0; i < os.h; ++i)
            for (int j = 0; j < os.w; ++j) {
              double acc = b[static_cast<std::size_t>(o)];
              for (int c = 0; c < s.in; ++c)
                for (int ki = 0; ki < s.kernel; ++ki)
                  for (int kj = 0; kj < s.kernel; ++kj) {
                    const int r = i * s.stride - s.padding + ki;
                    const int q = j * s.stride - s.padding + kj;
                    if (r < 0 || q < 0 || r >= x.shape.h || q >= x.shape.w) continue;
                    acc += w[static_cast<std::size_t>(((o * s.in + c) * s.kernel + ki) * s.kernel + kj)] *
                           x.at(n, c, r, q);
                  }
              y.at(n, o, i, j) = acc;
            }
      break;
    }
    case nn::LayerKind::TransposedConv: {
      // Scatter definition: every input element spreads a k x k stamp.
      const auto& w = ps[0]->value;
      const auto& b = ps[1]->value;
      for (int n = 0; n < os.n; ++n) {
        for (int o = 0; o < os.c; ++o)
          for (int i = 0; i < os.h; ++i)
            for (int j = 0; j < os.w; ++j) y.at(n, o, i, j) = b[static_cast<std::size_t>(o)];
        for (int c = 0; c < s.in; ++c)
          for (int i = 0; i < x.shape.h; ++i)
            for (int j = 0; j < x.shape.w; ++j)
              for (int o = 0; o < s.out; ++o)
                for (int ki = 0; ki < s.kernel; ++ki)
                  for (int kj = 0; kj < s.kernel; ++kj) {
                    const int r = i * s.stride - s.padding + ki;
                    const int q = j * s.stride - s.padding + kj;
                    if (r < 0 || q < 0 || r >= os.h || q >= os.w) continue;
                    y.at(n, o, r, q) +=
                        w[static_cast<std::size_t>(((c * s.out + o) * s.kernel + ki) * s.kernel + kj)] * x.at(n, c, i, j);
                  }
      }
      break;
    }
    case nn::LayerKind::FullyConnected: {
      const auto& w = ps[0]->value;
      const auto& b = ps[1]->value;
      const long in = x.shape.per_item();
      for (int n = 0; n < os.n; ++n)
        for (int o = 0; o < s.out; ++o) {
          double acc = b[static_cast<std::size_t>(o)];
          for (long k = 0; k < in; ++k) acc += w[static_cast<std::size_t>(o * in + k)] * x.item(n)[k];
          y.item(n)[o] = acc;
        }
      break;
    }
    case nn::LayerKind::MaxPool:
      for (int n = 0; n < os.n; ++n)
        for (int c = 0; c < os.c; ++c)
          for (int i = 0; i < os.h; ++i)
            for (int j = 0; j < os.w; ++j) {
              double m = -INFINITY;
              for (int a = 0; a < s.kernel; ++a)
                for (int b2 = 0; b2 < s.kernel; ++b2) m = std::max(m, x.at(n, c, i * s.kernel + a, j * s.kernel + b2));
              y.at(n, c, i, j) = m;
            }
      break;
    case nn::LayerKind::Dropout:
      y = x;
      break;
    case nn::LayerKind::Activation:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.data[i];
        switch (s.activation) {
          case nn::ActivationKind::LeakyRelu: y.data[i] = v > 0 ? v : 0.1 * v; break;
          case nn::ActivationKind::Relu: y.data[i] = v > 0 ? v : 0.0; break;
          case nn::ActivationKind::Sigmoid: y.data[i] = 1.0 / (1.0 + std::exp(-v)); break;
        }
      }
      break;
  }
  return y;
}

}  // namespace

T naive_forward(nn::Sequential<double>& model, const T& x) {
  T h = x;
  for (std::size_t i = 0; i < model.layer_count(); ++i) h = naive_layer(model.layer(i), h);
  return h;
}

GradCheck finite_difference_check(nn::Sequential<double>& model, const T& x, int probes, std::uint64_t seed,
                                  double eps) {
  Rng rng(seed);
  const nn::Shape os = model.output_shape(x.shape.n);
  std::vector<double> w(static_cast<std::size_t>(os.count()));
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);
  auto loss = [&](const T& in) {
    const T y = model.forward(in, false);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += w[i] * y.data[i];
    return l;
  };
  model.zero_grad();
  model.forward(x, false);
  T g(os);
  g.data = w;
  const T dx = model.backward(g);

  GradCheck out;
  auto rel = [](double a, double n) {
    const double scale = std::max({std::abs(a), std::abs(n), 1e-4});
    return std::abs(a - n) / scale;
  };
  auto params = model.params();
  std::size_t total = 0;
  for (auto* p : params) total += p->value.size();
  for (int k = 0; k < probes && total > 0; ++k) {
    std::size_t pick = rng.below(total);
    std::size_t pi = 0;
    while (pick >= params[pi]->value.size()) pick -= params[pi++]->value.size();
    auto& v = params[pi]->value[pick];
    const double orig = v;
    v = orig + eps;
    const double lp = loss(x);
    v = orig - eps;
    const double lm = loss(x);
    v = orig;
    out.max_rel_error = std::max(out.max_rel_error, rel(params[pi]->grad[pick], (lp - lm) / (2 * eps)));
    ++out.probes;
  }
  for (int k = 0; k < probes; ++k) {
    const std::size_t i = rng.below(x.size());
    T xp = x;
    xp.data[i] += eps;
    const double lp = loss(xp);
    xp.data[i] = x.data[i] - eps;
    const double lm = loss(xp);
    out.max_rel_error = std::max(out.max_rel_error, rel(dx.data[i], (lp - lm) / (2 * eps)));
    ++out.probes;
  }
  model.clear_cache();
  return out;
}

}  // namespace hideseek::oracle
