#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "episodes/dataset.hpp"
#include "models/features.hpp"
#include "nn/model.hpp"
#include "nn/optim.hpp"

namespace hideseek::models {

struct TrainConfig {
  int epochs = 10;
  int batch = 256;
  // Items per forward/backward pass; gradients accumulate over the batch.
  int micro_batch = 32;
  double lr = 0.001;
  std::vector<double> milestones{0.25, 0.65};
  double decay = 0.9;
  std::uint64_t seed = 1;
  double width = 1.0;
  bool augment = false;
  // Keep the parameters of the best validation epoch.
  bool keep_best = true;
  // Stop after this many optimizer steps (0 = no limit).
  long long max_steps = 0;

  void validate() const;
  nn::LrSchedule schedule() const { return {lr, milestones, decay}; }
};

TrainConfig vpt_defaults();
TrainConfig vpn_defaults();
nlohmann::json to_json(const TrainConfig& c);
// Overrides the fields present in `j`; unknown keys raise InvalidArgument.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<double> val_accuracy;
  double lr = 0.0;
  long long steps = 0;
  double seconds = 0.0;
};
nlohmann::json to_json(const EpochMetrics& m);

using EpochCallback = std::function<void(const EpochMetrics&)>;

struct TrainResult {
  nn::Sequential<float> model;
  std::vector<EpochMetrics> history;
  double initial_val_loss = 0.0;
  int best_epoch = 0;
  std::vector<std::string> warnings;
};

// Pixel MSE between predicted and true seeker views.
TrainResult train_vpt(const std::vector<const episodes::TrainingSample*>& train,
                      const std::vector<const episodes::TrainingSample*>& val, const TrainConfig& cfg,
                      const EpochCallback& on_epoch = {});

double vpt_mse(nn::Sequential<float>& model, const std::vector<const episodes::TrainingSample*>& samples,
               int batch = 32);

// Frames for the catch classifier: RGB in [0, 1] with binary labels.
struct FrameSet {
  Tensor frames;  // [N, 3, H, W]
  std::vector<float> labels;

  int size() const { return frames.shape.n; }
};

FrameSet frames_from_samples(const std::vector<const episodes::TrainingSample*>& samples);
// Soft VPT predictions for each sample, labelled with the sample's caught flag.
FrameSet predicted_frames(nn::Sequential<float>& vpt, const std::vector<const episodes::TrainingSample*>& samples,
                          int batch = 32);

// Weighted cross-entropy with inverse class frequencies; accuracy at 0.5.
TrainResult train_vpn(const FrameSet& train, const FrameSet& val, const TrainConfig& cfg,
                      const EpochCallback& on_epoch = {});

double vpn_accuracy(nn::Sequential<float>& model, const FrameSet& set, int batch = 64);
std::vector<float> vpn_scores(nn::Sequential<float>& model, const FrameSet& set, int batch = 64);

// Splits a dataset's samples by their stored split tag.
struct SplitView {
  std::vector<const episodes::TrainingSample*> train;
  std::vector<const episodes::TrainingSample*> val;
  std::vector<const episodes::TrainingSample*> test;
};
SplitView split_samples(const std::vector<episodes::TrainingSample>& samples);

// Frames for a classifier that will score the predictor's outputs. The
// predictor fits its own training split more closely than unseen episodes, so
// model selection uses predictions on validation episodes it never trained on:
// odd validation episodes validate, even ones join the training frames.
struct PredictedFrameSplit {
  FrameSet train;
  FrameSet val;
  FrameSet test;
};
PredictedFrameSplit predicted_frame_split(nn::Sequential<float>& vpt, const SplitView& split);

}  // namespace hideseek::models
