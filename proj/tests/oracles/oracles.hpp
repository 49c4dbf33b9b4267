#pragma once

// Independent reference implementations used only by tests.

#include <functional>
#include <optional>
#include <vector>

#include "nn/model.hpp"
#include "perception/visibility.hpp"
#include "sim/nav_grid.hpp"

namespace hideseek::oracle {

// Exact path cost s + d*sqrt(2) held as the integer pair (s, d).
struct ExactCost {
  long s = 0;
  long d = 0;
  friend bool operator==(ExactCost, ExactCost) = default;
};
// Strict a < b, decided without floating point.
bool less(ExactCost a, ExactCost b);

// Plain Dijkstra over the 8-connected free cells (no corner cutting).
std::optional<ExactCost> dijkstra(const sim::NavGrid& grid, sim::Cell start, sim::Cell goal);

// Casts rays every 0.1 degrees across the field of view, marches each one in
// 0.25 mm steps until it enters an obstacle or leaves the arena, and marks a
// pixel visible when its centre is inside the wedge and no farther than the
// free length of the nearest ray.
std::vector<std::uint8_t> ray_march_visibility(const sim::Pose& pose, const sim::Arena& arena,
                                               const perception::RasterGeometry& geom, double fov_deg);

// Forward pass written as direct per-element loops over the model's
// parameters (dropout treated as identity).
nn::Tensor<double> naive_forward(nn::Sequential<double>& model, const nn::Tensor<double>& x);

struct GradCheck {
  double max_rel_error = 0.0;
  int probes = 0;
};

// Central differences of L = sum(w * model(x)) for `probes` random
// parameters and `probes` random inputs against backward().
GradCheck finite_difference_check(nn::Sequential<double>& model, const nn::Tensor<double>& x, int probes,
                                  std::uint64_t seed, double eps = 1e-6);

}  // namespace hideseek::oracle
