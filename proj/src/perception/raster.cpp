#include "perception/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "common/error.hpp"

namespace hideseek::perception {

RasterGeometry::RasterGeometry(double arena_width_mm, double arena_height_mm, int width, int height)
    : arena_w_(arena_width_mm), arena_h_(arena_height_mm), width_(width), height_(height) {
  if (width <= 0 || height <= 0) fail(Errc::InvalidArgument, "raster dimensions must be positive");
  px_w_ = arena_width_mm / width;
  px_h_ = arena_height_mm / height;
}

Pixel RasterGeometry::pixel_of(sim::Vec2 p) const {
  return {std::clamp(static_cast<int>(std::floor(p.y / px_h_)), 0, height_ - 1),
          std::clamp(static_cast<int>(std::floor(p.x / px_w_)), 0, width_ - 1)};
}

sim::Vec2 RasterGeometry::center(Pixel p) const { return {(p.col + 0.5) * px_w_, (p.row + 0.5) * px_h_}; }

Raster::Raster(int w, int h, Rgba fill) : width(w), height(h) {
  rgba.resize(static_cast<std::size_t>(w) * h * 4);
  for (std::size_t i = 0; i < rgba.size(); i += 4) std::copy(fill.begin(), fill.end(), rgba.begin() + i);
}

Rgba Raster::at(int row, int col) const {
  const std::size_t o = (static_cast<std::size_t>(row) * width + col) * 4;
  return {rgba[o], rgba[o + 1], rgba[o + 2], rgba[o + 3]};
}

void Raster::set(int row, int col, Rgba value) {
  const std::size_t o = (static_cast<std::size_t>(row) * width + col) * 4;
  std::copy(value.begin(), value.end(), rgba.begin() + static_cast<std::ptrdiff_t>(o));
}

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = PNG_FORMAT_RGBA;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.rgba.data(), 0, nullptr)) {
    fail(Errc::Io, std::string("png size query failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.rgba.data(), 0, nullptr)) {
    fail(Errc::Io, std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(Errc::Io, std::string("png decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGBA;
  Raster out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.rgba.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(Errc::Io, std::string("png decode failed: ") + image.message);
  }
  return out;
}

void write_png(const Raster& raster, const std::filesystem::path& path) {
  const auto bytes = encode_png(raster);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(Errc::Io, "write failed: " + path.string());
}

Raster read_png(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace hideseek::perception
