#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "episodes/policy.hpp"
#include "sim/world.hpp"

namespace hideseek::episodes {

struct StepEntry {
  sim::MotionPrimitive hider_cmd = sim::MotionPrimitive::Stay;
  sim::Pose hider;
  sim::MotionPrimitive seeker_cmd = sim::MotionPrimitive::Stay;
  sim::Pose seeker;
  bool caught = false;
  friend bool operator==(const StepEntry&, const StepEntry&) = default;
};

enum class TerminalCause { Caught, MaxSteps };

// One seeded episode. `steps[k]` is the state after tick k + 1. After a catch
// the world freezes and the record ends; `hider_tail` keeps the primitives the
// hider policy would have issued up to max_steps.
struct EpisodeRecord {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  int max_steps = 0;
  sim::StartPoses start;
  std::vector<StepEntry> steps;
  int terminal_step = 0;
  TerminalCause cause = TerminalCause::MaxSteps;
  std::vector<sim::MotionPrimitive> hider_tail;

  // Executed hider primitives followed by the tail.
  std::vector<sim::MotionPrimitive> hider_primitives() const;
  sim::Pose hider_at(int t) const;
  sim::Pose seeker_at(int t) const;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// Runs hider/seeker turns from step 0 until caught or max_steps.
EpisodeRecord run_episode(const sim::Simulator& sim, HiderPolicy& policy, std::uint64_t seed,
                          const std::optional<sim::StartPoses>& start = std::nullopt);

// Re-executes a primitive sequence (then Stay) under the same seed.
EpisodeRecord replay_episode(const sim::Simulator& sim, const std::vector<sim::MotionPrimitive>& hider_primitives,
                             std::uint64_t seed, const std::optional<sim::StartPoses>& start = std::nullopt);

// Intended hider trajectory, poses 0..length, following the record while it
// lasts and the tail kinematically afterwards.
std::vector<sim::Pose> hider_trajectory(const sim::Simulator& sim, const EpisodeRecord& rec, int length);

nlohmann::json to_json(const EpisodeRecord& rec);
EpisodeRecord episode_from_json(const nlohmann::json& j);
void save_episode(const EpisodeRecord& rec, const std::filesystem::path& path);
EpisodeRecord load_episode(const std::filesystem::path& path);

}  // namespace hideseek::episodes
