#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "sim/geometry.hpp"

namespace hideseek::sim {

struct StartPoses {
  Pose hider;
  Pose seeker;
  friend bool operator==(const StartPoses&, const StartPoses&) = default;
};

// Everything needed to instantiate a simulator. Loaded from JSON.
struct Scenario {
  Arena arena = Arena::default_layout();
  double robot_radius_mm = 60.0;
  double catch_radius_mm = 130.0;
  double fov_deg = 86.0;
  std::optional<StartPoses> start;  // nullopt = random, seeded
  std::uint64_t seed = 1;
  int max_steps = 200;
  int nav_resolution = 64;
  int obs_resolution = 128;
  double planning_clearance_mm = 15.0;
  double min_start_separation_mm = 400.0;

  void validate() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// Hex SHA-256 of the canonical JSON serialization.
std::string scenario_hash(const Scenario& s);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace hideseek::sim
