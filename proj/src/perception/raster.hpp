#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sim/geometry.hpp"

namespace hideseek::perception {

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(Pixel, Pixel) = default;
};

// The single arena-to-raster affine map shared by every raster: column grows
// with x, row grows with y, pixels tile the arena exactly.
class RasterGeometry {
 public:
  RasterGeometry() = default;
  RasterGeometry(double arena_width_mm, double arena_height_mm, int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  double pixel_width_mm() const { return px_w_; }
  double pixel_height_mm() const { return px_h_; }
  bool inside(Pixel p) const { return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_; }
  int index(Pixel p) const { return p.row * width_ + p.col; }

  Pixel pixel_of(sim::Vec2 p) const;
  sim::Vec2 center(Pixel p) const;
  // Centre of the pixel containing `p`.
  sim::Vec2 snap(sim::Vec2 p) const { return center(pixel_of(p)); }

  friend bool operator==(const RasterGeometry&, const RasterGeometry&) = default;

 private:
  double arena_w_ = 0.0;
  double arena_h_ = 0.0;
  int width_ = 0;
  int height_ = 0;
  double px_w_ = 0.0;
  double px_h_ = 0.0;
};

using Rgba = std::array<std::uint8_t, 4>;

// Row-major 8-bit RGBA image.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;

  Raster() = default;
  Raster(int w, int h, Rgba fill = {0, 0, 0, 0});

  Rgba at(int row, int col) const;
  void set(int row, int col, Rgba value);
  friend bool operator==(const Raster&, const Raster&) = default;
};

// Semantic colours of an observation raster. Pairwise distinct RGB triples,
// all fully opaque.
namespace palette {
inline constexpr int kVersion = 1;
inline constexpr Rgba kVisibleFree{255, 255, 255, 255};
inline constexpr Rgba kObstacle{0, 0, 0, 255};
inline constexpr Rgba kInvisible{0, 0, 255, 255};
inline constexpr Rgba kSelf{0, 255, 0, 255};
inline constexpr Rgba kOther{255, 0, 0, 255};
}  // namespace palette

enum class PixelClass { VisibleFree = 0, Obstacle = 1, Invisible = 2, Self = 3, Other = 4 };
inline constexpr std::array<Rgba, 5> kPaletteColors = {palette::kVisibleFree, palette::kObstacle, palette::kInvisible,
                                                      palette::kSelf, palette::kOther};

// Encoded PNG (8-bit RGBA) in memory and on disk.
std::vector<std::uint8_t> encode_png(const Raster& raster);
Raster decode_png(std::span<const std::uint8_t> bytes);
void write_png(const Raster& raster, const std::filesystem::path& path);
Raster read_png(const std::filesystem::path& path);

}  // namespace hideseek::perception
