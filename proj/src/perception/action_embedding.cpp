#include "perception/action_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hideseek::perception {

ActionEmbedding encode_actions(std::span<const sim::Pose> trajectory, const RasterGeometry& geom) {
  const int w = geom.width();
  const int h = geom.height();
  ActionEmbedding out{Raster(w, h, kVisitationColor), Raster(w, h, kRecencyColor)};
  if (trajectory.empty()) return out;

  std::vector<int> visits(static_cast<std::size_t>(w) * h, 0);
  std::vector<int> last(static_cast<std::size_t>(w) * h, -1);
  for (std::size_t step = 0; step < trajectory.size(); ++step) {
    const auto i = static_cast<std::size_t>(geom.index(geom.pixel_of(trajectory[step].position())));
    ++visits[i];
    last[i] = static_cast<int>(step);
  }
  const double horizon = static_cast<double>(trajectory.size() - 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto i = static_cast<std::size_t>(r * w + c);
      if (visits[i] == 0) continue;
      const auto o = i * 4 + 3;
      out.visitation.rgba[o] = static_cast<std::uint8_t>(std::min(255, kVisitAlphaStep * visits[i]));
      out.recency.rgba[o] = static_cast<std::uint8_t>(std::lround(255.0 * (last[i] + 1) / (horizon + 1.0)));
    }
  }
  return out;
}

}  // namespace hideseek::perception
