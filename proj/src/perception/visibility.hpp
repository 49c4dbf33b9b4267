#pragma once

#include <cstdint>
#include <vector>

#include "perception/raster.hpp"
#include "sim/geometry.hpp"

namespace hideseek::perception {

struct SensorModel {
  double fov_deg = 86.0;
  double robot_radius_mm = 60.0;

  double half_fov_deg() const { return fov_deg / 2.0; }
};

// Per-pixel visibility from a pose: a pixel is visible iff its centre lies in
// the field-of-view wedge and the segment from the robot centre to the pixel
// centre meets no obstacle. Range is unlimited inside the arena.
struct VisibilityField {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> visible;

  bool at(Pixel p) const { return visible[static_cast<std::size_t>(p.row * width + p.col)] != 0; }
  std::size_t count() const;
};

bool in_fov(const sim::Pose& pose, sim::Vec2 point, const SensorModel& sensor);
bool point_visible(const sim::Pose& pose, sim::Vec2 point, const sim::Arena& arena, const SensorModel& sensor);
bool pixel_visible(const sim::Pose& pose, Pixel px, const sim::Arena& arena, const RasterGeometry& geom,
                   const SensorModel& sensor);

VisibilityField compute_visibility(const sim::Pose& pose, const sim::Arena& arena, const RasterGeometry& geom,
                                   const SensorModel& sensor);

// Pixels of a robot's circle: those whose centres lie within the robot radius
// of the centre of the pixel containing the robot. The set is symmetric about
// that pixel.
std::vector<Pixel> footprint_pixels(const RasterGeometry& geom, sim::Vec2 robot_center, double radius_mm);

// A robot is visible to an observer iff any of its footprint pixels is.
bool robot_visible(const sim::Pose& observer, sim::Vec2 target, const sim::Arena& arena, const RasterGeometry& geom,
                   const SensorModel& sensor);
bool robot_visible(const VisibilityField& vis, const RasterGeometry& geom, sim::Vec2 target, double radius_mm);

// Omnidirectional line of sight between two points (ignores the FoV wedge).
bool line_of_sight(const sim::Arena& arena, sim::Vec2 a, sim::Vec2 b);

}  // namespace hideseek::perception
