#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "sim/world.hpp"

namespace hideseek::episodes {

// Hider data-collection policy. Policies observe only the hider's own pose
// and the step index, so the hider's trajectory never depends on the seeker.
class HiderPolicy {
 public:
  virtual ~HiderPolicy() = default;
  virtual sim::MotionPrimitive next(const sim::Pose& hider, int step) = 0;
};

// Uniform over the four movement primitives.
class RandomPolicy final : public HiderPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  sim::MotionPrimitive next(const sim::Pose& hider, int step) override;

 private:
  Rng rng_;
};

// Emits a fixed primitive sequence verbatim, then Stay forever.
class SequencePolicy final : public HiderPolicy {
 public:
  explicit SequencePolicy(std::vector<sim::MotionPrimitive> seq) : seq_(std::move(seq)) {}
  sim::MotionPrimitive next(const sim::Pose& hider, int step) override;
  const std::vector<sim::MotionPrimitive>& sequence() const { return seq_; }

 private:
  std::vector<sim::MotionPrimitive> seq_;
  std::size_t pos_ = 0;
};

// Play-like scripted hider: picks a random free goal, drives there with A*,
// waits, and switches to a fresh goal after a seeded random interval.
class ScriptedPolicy final : public HiderPolicy {
 public:
  ScriptedPolicy(const sim::Simulator& sim, std::uint64_t seed);
  sim::MotionPrimitive next(const sim::Pose& hider, int step) override;

  static constexpr int kMinSwitch = 60;
  static constexpr int kMaxSwitch = 260;

 private:
  void replan(const sim::Pose& hider);

  const sim::Simulator* sim_;
  Rng rng_;
  std::vector<sim::Vec2> goals_;
  std::deque<sim::MotionPrimitive> queue_;
  int next_switch_ = 0;
};

struct HumanTrajectory {
  std::vector<sim::MotionPrimitive> primitives;
  // Provenance of live recordings; absent for hand-written banks.
  std::optional<std::uint64_t> seed;
  std::optional<sim::StartPoses> start;
};

struct HumanTrajectoryBank {
  std::vector<HumanTrajectory> trajectories;
};

HumanTrajectoryBank load_bank(const std::filesystem::path& path);
void save_bank(const HumanTrajectoryBank& bank, const std::filesystem::path& path);
// Appends one entry, creating the file when missing. Rejects empty entries.
void append_to_bank(const HumanTrajectory& entry, const std::filesystem::path& path);

// Samples one bank trajectory by seed and replays it verbatim, then Stay.
std::unique_ptr<SequencePolicy> replay_human(const HumanTrajectoryBank& bank, std::uint64_t seed);

enum class PolicyKind { Random, Human, Scripted };
PolicyKind parse_policy_kind(const std::string& name);
std::string to_string(PolicyKind kind);

std::unique_ptr<HiderPolicy> make_policy(PolicyKind kind, const sim::Simulator& sim, std::uint64_t seed,
                                         const HumanTrajectoryBank* bank);

}  // namespace hideseek::episodes
