#include "perception/render.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"

namespace hideseek::perception {

namespace {

bool inside_obstacle(const sim::Arena& arena, sim::Vec2 p) {
  for (const sim::Rect& r : arena.obstacles) {
    if (r.contains(p)) return true;
  }
  return false;
}

}  // namespace

ObservationGrid render_observation(const sim::Pose& self, const sim::Pose& other, const sim::Arena& arena,
                                   const RasterGeometry& geom, const VisibilityField& vis, const SensorModel& sensor) {
  const int w = geom.width();
  const int h = geom.height();
  ObservationGrid obs(w, h, palette::kInvisible);

  std::vector<std::uint8_t> solid(static_cast<std::size_t>(w) * h, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) solid[static_cast<std::size_t>(r * w + c)] = inside_obstacle(arena, geom.center({r, c}));
  }
  auto visible_free = [&](int r, int c) {
    if (r < 0 || c < 0 || r >= h || c >= w) return false;
    const auto i = static_cast<std::size_t>(r * w + c);
    return !solid[i] && vis.visible[i];
  };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto i = static_cast<std::size_t>(r * w + c);
      if (!solid[i]) {
        if (vis.visible[i]) obs.set(r, c, palette::kVisibleFree);
        continue;
      }
      const bool edge = visible_free(r - 1, c) || visible_free(r + 1, c) || visible_free(r, c - 1) ||
                        visible_free(r, c + 1);
      if (edge && in_fov(self, geom.center({r, c}), sensor)) obs.set(r, c, palette::kObstacle);
    }
  }

  for (const Pixel& p : footprint_pixels(geom, self.position(), sensor.robot_radius_mm)) {
    obs.set(p.row, p.col, palette::kSelf);
  }
  if (robot_visible(vis, geom, other.position(), sensor.robot_radius_mm)) {
    for (const Pixel& p : footprint_pixels(geom, other.position(), sensor.robot_radius_mm)) {
      obs.set(p.row, p.col, palette::kOther);
    }
  }
  return obs;
}

ObservationGrid render_observation(const sim::Pose& self, const sim::Pose& other, const sim::Arena& arena,
                                   const RasterGeometry& geom, const SensorModel& sensor) {
  return render_observation(self, other, arena, geom, compute_visibility(self, arena, geom, sensor), sensor);
}

std::optional<PixelClass> classify(Rgba color) {
  for (std::size_t k = 0; k < kPaletteColors.size(); ++k) {
    if (kPaletteColors[k] == color) return static_cast<PixelClass>(k);
  }
  return std::nullopt;
}

PixelClass nearest_palette_class(float r, float g, float b) {
  int best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t k = 0; k < kPaletteColors.size(); ++k) {
    const float dr = r - kPaletteColors[k][0];
    const float dg = g - kPaletteColors[k][1];
    const float db = b - kPaletteColors[k][2];
    const float d = dr * dr + dg * dg + db * db;
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return static_cast<PixelClass>(best);
}

namespace {

struct Mask {
  int w = 0;
  int h = 0;
  std::vector<std::uint8_t> bits;
  int count = 0;
  double sum_r = 0.0;
  double sum_c = 0.0;

  bool at(Pixel p) const { return bits[static_cast<std::size_t>(p.row * w + p.col)] != 0; }
  Pixel centroid() const {
    return {static_cast<int>(std::lround(sum_r / count)), static_cast<int>(std::lround(sum_c / count))};
  }
};

// Searches a window around the mask centroid for a disc centre whose
// footprint, minus the `cover` mask, equals `mask` exactly.
std::optional<Pixel> fit_disc(const Mask& mask, const Mask* cover, const RasterGeometry& geom, double radius_mm) {
  const Pixel guess = mask.centroid();
  const int reach = static_cast<int>(std::ceil(radius_mm / std::min(geom.pixel_width_mm(), geom.pixel_height_mm()))) + 1;
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      const Pixel c{guess.row + dr, guess.col + dc};
      if (!geom.inside(c)) continue;
      int matched = 0;
      bool ok = true;
      for (const Pixel& p : footprint_pixels(geom, geom.center(c), radius_mm)) {
        if (mask.at(p)) {
          ++matched;
        } else if (!(cover && cover->at(p))) {
          ok = false;
          break;
        }
      }
      if (ok && matched == mask.count) return c;
    }
  }
  return std::nullopt;
}

}  // namespace

DecodedRobots decode_positions(const ObservationGrid& obs, const RasterGeometry& geom, double robot_radius_mm) {
  if (obs.width != geom.width() || obs.height != geom.height()) {
    fail(Errc::MalformedObservation, "observation size does not match raster geometry");
  }
  Mask self{obs.width, obs.height, std::vector<std::uint8_t>(static_cast<std::size_t>(obs.width) * obs.height, 0)};
  Mask other = self;
  for (int r = 0; r < obs.height; ++r) {
    for (int c = 0; c < obs.width; ++c) {
      const auto cls = classify(obs.at(r, c));
      if (!cls) {
        fail(Errc::MalformedObservation,
             "off-palette pixel at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
      }
      Mask* m = *cls == PixelClass::Self ? &self : *cls == PixelClass::Other ? &other : nullptr;
      if (!m) continue;
      m->bits[static_cast<std::size_t>(r * obs.width + c)] = 1;
      ++m->count;
      m->sum_r += r;
      m->sum_c += c;
    }
  }
  if (self.count == 0 && other.count == 0) fail(Errc::MalformedObservation, "no self robot circle in observation");

  DecodedRobots out;
  if (other.count > 0) {
    const Pixel p = fit_disc(other, nullptr, geom, robot_radius_mm).value_or(other.centroid());
    out.other_pixel = p;
    out.other_mm = geom.center(p);
  }
  if (self.count > 0) {
    out.self_pixel = fit_disc(self, other.count > 0 ? &other : nullptr, geom, robot_radius_mm).value_or(self.centroid());
  } else {
    // Fully covered by the other circle: the centres coincide.
    out.self_pixel = *out.other_pixel;
  }
  out.self_mm = geom.center(out.self_pixel);
  return out;
}

}  // namespace hideseek::perception
