#pragma once

#include <span>

#include "perception/raster.hpp"

namespace hideseek::perception {

// Visitation map F and time-encoded trajectory map T. The RGB colour of each
// map is fixed; the alpha channel carries the encoding:
//   F alpha = min(255, 32 * visits)
//   T alpha = round(255 * (last_visit_step + 1) / (horizon + 1))
// where horizon is the index of the final trajectory pose. Unvisited pixels
// are fully transparent in both maps.
struct ActionEmbedding {
  Raster visitation;
  Raster recency;
  friend bool operator==(const ActionEmbedding&, const ActionEmbedding&) = default;
};

inline constexpr Rgba kVisitationColor{255, 128, 0, 0};
inline constexpr Rgba kRecencyColor{128, 0, 255, 0};
inline constexpr int kVisitAlphaStep = 32;

ActionEmbedding encode_actions(std::span<const sim::Pose> trajectory, const RasterGeometry& geom);

}  // namespace hideseek::perception
