#include "sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace hideseek::sim {

namespace {

constexpr int kPatrolLattice = 4;

Scenario validated(Scenario s) {
  s.validate();
  return s;
}

}  // namespace

Simulator::Simulator(Scenario scenario)
    : scenario_(validated(std::move(scenario))),
      nav_(scenario_.arena, scenario_.nav_resolution, scenario_.robot_radius_mm + scenario_.planning_clearance_mm),
      raster_(scenario_.arena.width_mm, scenario_.arena.height_mm, scenario_.obs_resolution,
              scenario_.obs_resolution),
      sensor_{scenario_.fov_deg, scenario_.robot_radius_mm} {
  for (int i = 0; i < kPatrolLattice; ++i) {
    for (int j = 0; j < kPatrolLattice; ++j) {
      const Vec2 p{scenario_.arena.width_mm * (j + 0.5) / kPatrolLattice,
                   scenario_.arena.height_mm * (i + 0.5) / kPatrolLattice};
      const auto c = nav_.nearest_free(nav_.cell_of(p));
      if (!c) continue;
      const int idx = nav_.index(*c);
      if (std::find(waypoints_.begin(), waypoints_.end(), idx) == waypoints_.end()) waypoints_.push_back(idx);
    }
  }
  if (waypoints_.empty()) fail(Errc::InvalidScenario, "arena has no free space for the seeker");
}

StartPoses Simulator::start_poses(std::uint64_t seed) const {
  if (scenario_.start) return *scenario_.start;
  Rng rng(mix_seed(seed, 1));
  const double r = nav_.inflation_mm();
  const double w = scenario_.arena.width_mm;
  const double h = scenario_.arena.height_mm;
  auto face = [](Vec2 from, Vec2 to) {
    const double bearing = std::atan2(to.y - from.y, to.x - from.x) * 180.0 / std::numbers::pi;
    return normalize_deg(std::round(bearing / kTurnDeg) * kTurnDeg);
  };
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vec2 a{rng.uniform(r, w - r), rng.uniform(r, h - r)};
    const Vec2 b{rng.uniform(r, w - r), rng.uniform(r, h - r)};
    if (!disc_free(scenario_.arena, a, r) || !disc_free(scenario_.arena, b, r)) continue;
    if (distance(a, b) < scenario_.min_start_separation_mm) continue;
    StartPoses s{{a.x, a.y, face(a, b)}, {b.x, b.y, face(b, a)}};
    if (!perception::robot_visible(s.hider, b, scenario_.arena, raster_, sensor_)) continue;
    if (!perception::robot_visible(s.seeker, a, scenario_.arena, raster_, sensor_)) continue;
    return s;
  }
  fail(Errc::InvalidScenario, "could not sample mutually visible start poses");
}

std::vector<int> Simulator::patrol_order(std::uint64_t seed) const {
  std::vector<int> order = waypoints_;
  Rng rng(mix_seed(seed, 2));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

WorldState Simulator::initial_state(std::uint64_t seed) const { return initial_state(start_poses(seed), seed); }

WorldState Simulator::initial_state(const StartPoses& start, std::uint64_t seed) const {
  WorldState s;
  s.hider = start.hider;
  s.seeker = start.seeker;
  s.seeker_memory.patrol = patrol_order(seed);
  s.caught = check_caught(s);
  return s;
}

bool Simulator::hider_visible_to_seeker(const WorldState& s) const {
  return perception::robot_visible(s.seeker, s.hider.position(), scenario_.arena, raster_, sensor_);
}

bool Simulator::seeker_visible_to_hider(const WorldState& s) const {
  return perception::robot_visible(s.hider, s.seeker.position(), scenario_.arena, raster_, sensor_);
}

std::optional<GridPath> Simulator::plan_path(Vec2 from, Vec2 to) const {
  const auto start = nav_.nearest_free(nav_.cell_of(from));
  const auto goal = nav_.nearest_free(nav_.cell_of(to));
  if (!start || !goal) return std::nullopt;
  return astar(*start, *goal, nav_);
}

std::optional<MotionPrimitive> Simulator::pursue(const Pose& pose, Vec2 target) const {
  const auto path = plan_path(pose.position(), target);
  if (!path) return std::nullopt;
  const auto prims = path_to_primitives(*path, pose, nav_);
  return prims.empty() ? MotionPrimitive::Stay : prims.front();
}

MotionPrimitive Simulator::seeker_policy_step(WorldState& s, bool hider_visible) const {
  SeekerMemory& mem = s.seeker_memory;
  const Cell here = nav_.cell_of(s.seeker.position());

  if (hider_visible) {
    mem.last_known_hider = s.hider.position();
    return pursue(s.seeker, s.hider.position()).value_or(MotionPrimitive::Stay);
  }

  if (mem.last_known_hider) {
    const auto target = nav_.nearest_free(nav_.cell_of(*mem.last_known_hider));
    if (target && here != *target) {
      if (const auto p = pursue(s.seeker, nav_.center(*target))) return *p;
    }
    mem.last_known_hider.reset();
  }

  const int n = static_cast<int>(mem.patrol.size());
  for (int attempt = 0; attempt < n; ++attempt) {
    const Cell wp = nav_.cell(mem.patrol[static_cast<std::size_t>(mem.patrol_cursor)]);
    if (here != wp) {
      if (const auto p = pursue(s.seeker, nav_.center(wp))) return *p;
    }
    mem.patrol_cursor = (mem.patrol_cursor + 1) % n;
  }
  return MotionPrimitive::Stay;
}

bool Simulator::check_caught(const WorldState& s) const {
  const double d = distance(raster_.snap(s.hider.position()), raster_.snap(s.seeker.position()));
  return d <= scenario_.catch_radius_mm && hider_visible_to_seeker(s);
}

Pose Simulator::move(const Pose& p, MotionPrimitive cmd) const {
  return apply_primitive(p, cmd, scenario_.arena, scenario_.robot_radius_mm);
}

TickResult Simulator::tick(WorldState& s, MotionPrimitive hider_cmd) const {
  TickResult out;
  if (s.caught) {
    ++s.step;
    return out;
  }
  s.hider = move(s.hider, hider_cmd);
  out.hider_visible = hider_visible_to_seeker(s);
  out.seeker_cmd = seeker_policy_step(s, out.hider_visible);
  s.seeker = move(s.seeker, out.seeker_cmd);
  ++s.step;
  s.caught = check_caught(s);
  return out;
}

perception::ObservationGrid Simulator::hider_view(const WorldState& s) const {
  return perception::render_observation(s.hider, s.seeker, scenario_.arena, raster_, sensor_);
}

perception::ObservationGrid Simulator::seeker_view(const WorldState& s) const {
  return perception::render_observation(s.seeker, s.hider, scenario_.arena, raster_, sensor_);
}

}  // namespace hideseek::sim
