#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "models/predictors.hpp"
#include "perception/raster.hpp"
#include "sim/world.hpp"

namespace hideseek::planner {

struct Goal {
  int index = 0;
  int row = 0;  // lattice coordinates
  int col = 0;
  sim::Vec2 xy;
  bool valid = false;
  friend bool operator==(const Goal&, const Goal&) = default;
};

// side x side goals at ((i + 1) W / (side + 1), (j + 1) H / (side + 1)). A goal
// is valid iff its nav cell is free and reachable from the hider.
struct GoalLattice {
  int side = 11;
  std::vector<Goal> goals;
  friend bool operator==(const GoalLattice&, const GoalLattice&) = default;
};

GoalLattice make_lattice(const sim::Simulator& sim, const sim::Pose& hider, int side = 11);

struct ValueMapConfig {
  int horizon = 200;  // T
  int interval = 10;  // N
  int side = 11;
};

// Checkpoints t_k = kN - 1 for k = 1 .. floor(T / N).
std::vector<int> checkpoints(int horizon, int interval);

// Risk V per goal (caught checkpoints) and safety S = K_max - V. Invalid
// goals carry no value.
struct ValueMap {
  GoalLattice lattice;
  int horizon = 0;
  int interval = 0;
  int k_max = 0;
  std::vector<std::optional<int>> risk;

  std::optional<int> safety(std::size_t i) const {
    return risk[i] ? std::optional<int>(k_max - *risk[i]) : std::nullopt;
  }
  friend bool operator==(const ValueMap&, const ValueMap&) = default;
};

// A* path from the hider's cell to the goal's cell as primitives, truncated
// or padded with Stay to `horizon`. NoPath when unreachable.
std::vector<sim::MotionPrimitive> plan_to_goal(const sim::Simulator& sim, const sim::Pose& hider, sim::Vec2 goal,
                                               int horizon);

// Poses 0..plan.size() of the hider executing `plan` on its own.
std::vector<sim::Pose> hider_rollout(const sim::Simulator& sim, const sim::Pose& start,
                                     std::span<const sim::MotionPrimitive> plan);

ValueMap compute_value_map(const sim::Simulator& sim, const sim::WorldState& state,
                           models::PerspectivePredictor& predictor, models::CatchClassifier& classifier,
                           const ValueMapConfig& cfg = {});

// Ground truth: executes every goal's plan in the simulator and counts the
// checkpoints at which the caught flag is set.
ValueMap brute_force_value_map(const sim::Simulator& sim, const sim::WorldState& state,
                               const ValueMapConfig& cfg = {});

// Highest safety; ties go to the goal farthest from `seeker`, then the lowest
// index. NoValidGoal when nothing is valid.
int select_goal(const ValueMap& map, sim::Vec2 seeker);

struct RankingReport {
  int pairs = 0;
  int correct = 0;
  double accuracy = 0.0;  // 0 when there are no pairs
  double min_distance = 3.0;
};

struct GoalPair {
  int a = 0;
  int b = 0;
};

// Valid goal pairs at least `min_distance` lattice units apart (Euclidean)
// whose truth safety differs.
std::vector<GoalPair> ranking_pairs(const ValueMap& truth, double min_distance = 3.0);

// Fraction of pairs whose predicted safety order matches the truth order;
// predicted ties count as mismatches. LatticeMismatch on differing lattices.
RankingReport ranking_accuracy(const ValueMap& predicted, const ValueMap& truth, double min_distance = 3.0);
RankingReport ranking_accuracy(std::span<const double> predicted_safety, std::span<const double> truth_safety,
                               std::span<const GoalPair> pairs);

struct HorizonResult {
  int horizon = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<RankingReport> per_scenario;
};

// Ranking accuracy against brute force at each horizon over `states`.
// Scenarios without a rankable pair are left out of the mean.
std::vector<HorizonResult> horizon_generalization(const sim::Simulator& sim, std::span<const sim::WorldState> states,
                                                  models::PerspectivePredictor& predictor,
                                                  models::CatchClassifier& classifier, std::span<const int> horizons,
                                                  int interval = 10);

nlohmann::json to_json(const ValueMap& map, std::optional<int> selected = std::nullopt);
ValueMap value_map_from_json(const nlohmann::json& j);
void save_value_map(const ValueMap& map, const std::filesystem::path& path, std::optional<int> selected = std::nullopt);
ValueMap load_value_map(const std::filesystem::path& path);

// Heatmap over the arena: obstacles black, invalid goals grey, valid goals
// from blue (safe) to red (dangerous).
perception::Raster render_heatmap(const sim::Simulator& sim, const ValueMap& map, int cell_px = 32);

}  // namespace hideseek::planner
