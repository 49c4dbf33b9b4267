#include "oracles/generators.hpp"

namespace hideseek::gen {

using namespace nn;

sim::Arena random_layout(Rng& rng) {
  sim::Arena a;
  a.obstacles.clear();
  const int n = 1 + static_cast<int>(rng.below(5));
  for (int tries = 0; tries < 200 && static_cast<int>(a.obstacles.size()) < n; ++tries) {
    const double w = rng.uniform(40, 300);
    const double h = rng.uniform(40, 300);
    const double x = rng.uniform(20, 1180 - w);
    const double y = rng.uniform(20, 1180 - h);
    const sim::Rect r{x, y, x + w, y + h};
    bool ok = true;
    for (const auto& o : a.obstacles) ok = ok && !r.overlaps(o);
    if (ok) a.obstacles.push_back(r);
  }
  return a;
}

sim::Pose random_free_pose(Rng& rng, const sim::Arena& a, double radius) {
  for (;;) {
    const sim::Pose p{rng.uniform(0, 1200), rng.uniform(0, 1200), rng.uniform(0, 360)};
    if (sim::disc_free(a, p.position(), radius)) return p;
  }
}

SmallConfig random_config(Rng& rng) {
  const int c = rng.range(1, 3);
  const int hw = 4 * rng.range(2, 3);
  const int mid = rng.range(2, 4);
  const auto act = static_cast<ActivationKind>(rng.range(0, 2));
  switch (rng.range(0, 3)) {
    case 0: {
      const int k = rng.range(1, 2) * 2 + 1;
      return {c, hw, hw, {conv(c, mid, k, rng.range(1, 2), k / 2), activation(act), conv(mid, 2, 3, 1, 1),
                          activation(ActivationKind::Sigmoid)}};
    }
    case 1:
      return {c, hw, hw, {conv(c, mid, 3, 2, 1), activation(ActivationKind::LeakyRelu), tconv(mid, 2, 4, 2, 1),
                          activation(ActivationKind::Sigmoid)}};
    case 2:
      return {c, hw, hw, {conv(c, mid, 3, 1, 1), activation(act), maxpool(2), fc(mid * hw * hw / 4, 5),
                          activation(ActivationKind::LeakyRelu), fc(5, 1), activation(ActivationKind::Sigmoid)}};
    default:
      return {c, hw, hw, {tconv(c, mid, 3, 1, 1), activation(act), tconv(mid, 1, 2, 2, 0), conv(1, 2, 3, 2, 1)}};
  }
}

}  // namespace hideseek::gen
