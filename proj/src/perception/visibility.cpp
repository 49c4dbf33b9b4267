#include "perception/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hideseek::perception {

std::size_t VisibilityField::count() const {
  return static_cast<std::size_t>(std::count(visible.begin(), visible.end(), std::uint8_t{1}));
}

bool in_fov(const sim::Pose& pose, sim::Vec2 point, const SensorModel& sensor) {
  const sim::Vec2 d = point - pose.position();
  if (d.x == 0.0 && d.y == 0.0) return true;
  const double bearing = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
  return std::abs(sim::angle_diff_deg(bearing, pose.heading_deg)) <= sensor.half_fov_deg();
}

bool line_of_sight(const sim::Arena& arena, sim::Vec2 a, sim::Vec2 b) { return !sim::segment_blocked(arena, a, b); }

bool point_visible(const sim::Pose& pose, sim::Vec2 point, const sim::Arena& arena, const SensorModel& sensor) {
  return in_fov(pose, point, sensor) && line_of_sight(arena, pose.position(), point);
}

bool pixel_visible(const sim::Pose& pose, Pixel px, const sim::Arena& arena, const RasterGeometry& geom,
                   const SensorModel& sensor) {
  return point_visible(pose, geom.center(px), arena, sensor);
}

VisibilityField compute_visibility(const sim::Pose& pose, const sim::Arena& arena, const RasterGeometry& geom,
                                   const SensorModel& sensor) {
  VisibilityField field;
  field.width = geom.width();
  field.height = geom.height();
  field.visible.assign(static_cast<std::size_t>(field.width) * field.height, 0);
  for (int r = 0; r < field.height; ++r) {
    for (int c = 0; c < field.width; ++c) {
      field.visible[static_cast<std::size_t>(r * field.width + c)] = pixel_visible(pose, {r, c}, arena, geom, sensor);
    }
  }
  return field;
}

std::vector<Pixel> footprint_pixels(const RasterGeometry& geom, sim::Vec2 robot_center, double radius_mm) {
  const Pixel p0 = geom.pixel_of(robot_center);
  const int reach_r = static_cast<int>(std::ceil(radius_mm / geom.pixel_height_mm()));
  const int reach_c = static_cast<int>(std::ceil(radius_mm / geom.pixel_width_mm()));
  std::vector<Pixel> out;
  for (int dr = -reach_r; dr <= reach_r; ++dr) {
    for (int dc = -reach_c; dc <= reach_c; ++dc) {
      const Pixel q{p0.row + dr, p0.col + dc};
      if (!geom.inside(q)) continue;
      const double dx = dc * geom.pixel_width_mm();
      const double dy = dr * geom.pixel_height_mm();
      if (dx * dx + dy * dy <= radius_mm * radius_mm) out.push_back(q);
    }
  }
  return out;
}

bool robot_visible(const sim::Pose& observer, sim::Vec2 target, const sim::Arena& arena, const RasterGeometry& geom,
                   const SensorModel& sensor) {
  for (const Pixel& p : footprint_pixels(geom, target, sensor.robot_radius_mm)) {
    if (pixel_visible(observer, p, arena, geom, sensor)) return true;
  }
  return false;
}

bool robot_visible(const VisibilityField& vis, const RasterGeometry& geom, sim::Vec2 target, double radius_mm) {
  for (const Pixel& p : footprint_pixels(geom, target, radius_mm)) {
    if (vis.at(p)) return true;
  }
  return false;
}

}  // namespace hideseek::perception
