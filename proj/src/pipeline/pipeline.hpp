#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "episodes/dataset.hpp"
#include "models/training.hpp"
#include "planner/value_map.hpp"

// End-to-end commands shared by the C API, the CLI and the acceptance run.
namespace hideseek::pipeline {

namespace fs = std::filesystem;

enum class ModelKind { Vpt, Vpn };

// Checkpoint metadata written by the training commands.
struct ModelInfo {
  ModelKind kind = ModelKind::Vpt;
  int resolution = 0;
  // Classifier input: "oracle" frames or "predicted" soft frames.
  std::string input;
  nlohmann::json meta;
};
ModelInfo model_info(const nn::Checkpoint& ckpt);

// Runs one episode with the scenario's max_steps replaced by `steps` when
// non-negative.
episodes::EpisodeRecord simulate(const sim::Simulator& sim, std::uint64_t seed, int steps,
                                 episodes::PolicyKind policy, const episodes::HumanTrajectoryBank* bank);

// Trains the perspective transformer on the train/val split of a dataset and
// writes a checkpoint. Returns a summary object.
nlohmann::json train_vpt(const fs::path& data, const models::TrainConfig& cfg, const fs::path& out,
                         const models::EpochCallback& on_epoch = {});

// Trains the catch classifier on true frames, or on the transformer's soft
// predictions when `vpt` is given.
nlohmann::json train_vpn(const fs::path& data, const std::optional<fs::path>& vpt, const models::TrainConfig& cfg,
                         const fs::path& out, const models::EpochCallback& on_epoch = {});

// Predicts the seeker view for a dataset record and writes the quantized PNG.
// Returns {mse, pixel_accuracy} against the record's true view.
nlohmann::json predict(const fs::path& model, const fs::path& record, const fs::path& out_png);

// Predictor and classifier for planning; oracles stand in for missing files.
struct Components {
  std::unique_ptr<models::PerspectivePredictor> predictor;
  std::unique_ptr<models::CatchClassifier> classifier;
  bool learned_predictor = false;
  bool learned_classifier = false;
};
Components load_components(const sim::Simulator& sim, const std::optional<fs::path>& vpt,
                           const std::optional<fs::path>& vpn);

struct PlanResult {
  planner::ValueMap map;
  int selected = 0;
  double seconds = 0.0;
};
PlanResult plan(const sim::Simulator& sim, const sim::WorldState& state, Components& parts,
                const planner::ValueMapConfig& cfg);

// Initial states of evaluation scenario i: random starts seeded by
// mix_seed(seed, i).
std::vector<sim::WorldState> evaluation_states(const sim::Simulator& sim, std::uint64_t seed, int count);

// Ranking accuracy against brute force at each horizon.
nlohmann::json evaluate_ranking(const sim::Simulator& sim, Components& parts, std::span<const sim::WorldState> states,
                                std::span<const int> horizons, int interval);

// Held-out classifier accuracy on one split of a dataset.
nlohmann::json evaluate_vpn_accuracy(const fs::path& data, const fs::path& vpn, const std::optional<fs::path>& vpt,
                                     episodes::Split split);

// Appends the hider primitives of each episode file to the bank. Returns the
// number of entries written.
int export_bank(const std::vector<fs::path>& episodes, const fs::path& bank);

}  // namespace hideseek::pipeline
