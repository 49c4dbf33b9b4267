#pragma once

#include <optional>

#include "perception/raster.hpp"
#include "perception/visibility.hpp"

namespace hideseek::perception {

using ObservationGrid = Raster;

// Top-down observation from `self`'s point of view. Invisible pixels are
// blue, visible free pixels white, obstacle pixels on the visible boundary
// black. The self circle is always drawn; the other circle is drawn on top,
// and only when any of its footprint pixels is visible.
ObservationGrid render_observation(const sim::Pose& self, const sim::Pose& other, const sim::Arena& arena,
                                   const RasterGeometry& geom, const VisibilityField& vis, const SensorModel& sensor);

// Convenience overload computing the visibility field itself.
ObservationGrid render_observation(const sim::Pose& self, const sim::Pose& other, const sim::Arena& arena,
                                   const RasterGeometry& geom, const SensorModel& sensor);

struct DecodedRobots {
  Pixel self_pixel;
  sim::Vec2 self_mm;
  std::optional<Pixel> other_pixel;
  std::optional<sim::Vec2> other_mm;
};

// Recovers the robot circle centres. Throws MalformedObservation when a pixel
// is off-palette or no robot is drawn.
DecodedRobots decode_positions(const ObservationGrid& obs, const RasterGeometry& geom, double robot_radius_mm);

// Class of a palette pixel, or nullopt for an off-palette colour.
std::optional<PixelClass> classify(Rgba color);

// Index of the nearest palette colour by squared RGB distance, lowest index
// on ties.
PixelClass nearest_palette_class(float r, float g, float b);

}  // namespace hideseek::perception
