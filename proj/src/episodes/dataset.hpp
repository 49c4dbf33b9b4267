#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "episodes/episode.hpp"
#include "perception/action_embedding.hpp"
#include "perception/raster.hpp"

namespace hideseek::episodes {

enum class Split { Train, Val, Test };
std::string to_string(Split s);
Split parse_split(const std::string& s);

// (I_H0, F, T) -> I_S at step t_i, with the latched catch label.
struct TrainingSample {
  int episode = 0;
  std::uint64_t seed = 0;
  int t_i = 0;
  bool caught = false;
  Split split = Split::Train;
  sim::Pose hider_t0;
  sim::Pose seeker_t0;
  sim::Pose hider_ti;
  sim::Pose seeker_ti;
  perception::Raster i_h0;
  perception::ActionEmbedding actions;
  perception::Raster i_s;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

// Samples at t_i = stride, 2*stride, ... up to the terminal step, plus the
// terminal step itself. When `latch_after_catch` is set and the episode ended
// in a catch, sampling continues at stride multiples up to max_steps with the
// frozen seeker view, caught = true, and F/T from the hider's intended plan.
std::vector<TrainingSample> extract_samples(const sim::Simulator& sim, const EpisodeRecord& rec, int stride,
                                            bool latch_after_catch = true);

struct DatasetManifest {
  int count = 0;
  int width = 0;
  int height = 0;
  int palette_version = 0;
  std::string scenario_hash;
  nlohmann::json scenario;
  nlohmann::json extra;  // collection parameters
  std::vector<std::string> records;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<TrainingSample> samples;
};

inline constexpr std::uint32_t kRecordVersion = 1;

// One record file: magic "HSRD", u32 version, u32 JSON sidecar length, the
// sidecar, then four length-prefixed PNGs (I_H0, F, T, I_S). Little-endian.
std::vector<std::uint8_t> encode_record(const TrainingSample& s);
TrainingSample decode_record(const std::vector<std::uint8_t>& bytes);
std::string record_name(const TrainingSample& s);

DatasetManifest write_dataset(const std::vector<TrainingSample>& samples, const std::filesystem::path& dir,
                              const sim::Scenario& scenario, const nlohmann::json& extra = nlohmann::json::object());
Dataset read_dataset(const std::filesystem::path& dir);
DatasetManifest read_manifest(const std::filesystem::path& dir);

struct CollectOptions {
  int episodes = 700;
  PolicyKind policy = PolicyKind::Scripted;
  std::uint64_t seed = 1;
  int jobs = 1;
  int stride = 10;
  bool latch_after_catch = true;
  int split_weights[3] = {5, 1, 1};  // train, val, test, assigned by episode index
  const HumanTrajectoryBank* bank = nullptr;
};

struct CollectSummary {
  int episodes = 0;
  int samples = 0;
  int caught_episodes = 0;
  int caught_samples = 0;
};

Split split_for_episode(int episode, int total, const int weights[3]);
std::uint64_t episode_seed(std::uint64_t seed, int episode);

// Runs independent seeded episodes on `jobs` workers; a single writer stores
// the records. Output bytes do not depend on `jobs`.
CollectSummary collect(const sim::Simulator& sim, const CollectOptions& opts, const std::filesystem::path& dir);

}  // namespace hideseek::episodes
