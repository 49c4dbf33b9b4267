#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "perception/raster.hpp"
#include "perception/render.hpp"
#include "perception/visibility.hpp"
#include "sim/geometry.hpp"
#include "sim/nav_grid.hpp"
#include "sim/scenario.hpp"

namespace hideseek::sim {

struct SeekerMemory {
  std::optional<Vec2> last_known_hider;
  std::vector<int> patrol;  // nav-cell indices, visiting order
  int patrol_cursor = 0;
  friend bool operator==(const SeekerMemory&, const SeekerMemory&) = default;
};

struct WorldState {
  Pose hider;
  Pose seeker;
  int step = 0;
  SeekerMemory seeker_memory;
  bool caught = false;
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct TickResult {
  MotionPrimitive seeker_cmd = MotionPrimitive::Stay;
  bool hider_visible = false;
};

// Immutable world model for one scenario. All member functions are const and
// pure in (state, inputs), so one instance may be shared across threads.
class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const Arena& arena() const { return scenario_.arena; }
  const NavGrid& nav() const { return nav_; }
  const perception::RasterGeometry& raster() const { return raster_; }
  const perception::SensorModel& sensor() const { return sensor_; }
  // Free waypoints the seeker patrols, before the seeded shuffle.
  const std::vector<int>& patrol_waypoints() const { return waypoints_; }

  // Start poses from the scenario, or random ones facing each other, both
  // mutually visible and at least min_start_separation_mm apart.
  StartPoses start_poses(std::uint64_t seed) const;
  std::vector<int> patrol_order(std::uint64_t seed) const;
  WorldState initial_state(std::uint64_t seed) const;
  WorldState initial_state(const StartPoses& start, std::uint64_t seed) const;

  bool hider_visible_to_seeker(const WorldState& s) const;
  bool seeker_visible_to_hider(const WorldState& s) const;

  // Chooses the seeker's next primitive and updates its memory in `s`.
  MotionPrimitive seeker_policy_step(WorldState& s, bool hider_visible) const;

  // Distance between raster-snapped centres within the catch radius and the
  // hider visible to the seeker.
  bool check_caught(const WorldState& s) const;

  // One turn: hider moves, seeker moves, catch check. Once caught the world
  // is frozen and only the step counter advances.
  TickResult tick(WorldState& s, MotionPrimitive hider_cmd) const;

  Pose move(const Pose& p, MotionPrimitive cmd) const;

  perception::ObservationGrid hider_view(const WorldState& s) const;
  perception::ObservationGrid seeker_view(const WorldState& s) const;

  // First primitive of the plan from `pose` toward `target`; nullopt when no
  // path exists.
  std::optional<MotionPrimitive> pursue(const Pose& pose, Vec2 target) const;
  std::optional<GridPath> plan_path(Vec2 from, Vec2 to) const;

 private:
  Scenario scenario_;
  NavGrid nav_;
  perception::RasterGeometry raster_;
  perception::SensorModel sensor_;
  std::vector<int> waypoints_;
};

}  // namespace hideseek::sim
