#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "models/features.hpp"
#include "nn/model.hpp"
#include "perception/action_embedding.hpp"
#include "sim/world.hpp"

namespace hideseek::models {

// Everything a predictor may look at for one checkpoint. Oracles use the
// world state and plan; learned models only see I_H0 and the F/T embedding.
struct PredictionQuery {
  const sim::WorldState* state = nullptr;
  std::span<const sim::MotionPrimitive> plan;
  int t = 0;
  const perception::Raster* i_h0 = nullptr;
  const perception::ActionEmbedding* actions = nullptr;
};

struct Prediction {
  perception::ObservationGrid grid;
  // Unquantized RGB output of a learned model; empty for oracles.
  Tensor soft;
};

class PerspectivePredictor {
 public:
  virtual ~PerspectivePredictor() = default;
  virtual Prediction predict(const PredictionQuery& q) = 0;
  virtual std::vector<Prediction> predict_batch(std::span<const PredictionQuery> qs);
};

class CatchClassifier {
 public:
  virtual ~CatchClassifier() = default;
  // Probability in [0, 1] that the hider is caught in the depicted view.
  virtual double score(const Prediction& view) = 0;
  virtual std::vector<double> score_batch(std::span<const Prediction> views);
};

// Forward-simulates both robots t steps with the hider following the plan,
// then renders the seeker's view. PlanTooShort when plan.size() < t.
perception::ObservationGrid oracle_predict(const sim::Simulator& sim, const sim::WorldState& s0,
                                           std::span<const sim::MotionPrimitive> plan, int t);

// 1 iff the decoded view shows the hider within the catch radius of the
// seeker; MalformedObservation when no robot can be decoded.
double oracle_score(const sim::Simulator& sim, const perception::ObservationGrid& view);

class OraclePredictor final : public PerspectivePredictor {
 public:
  explicit OraclePredictor(const sim::Simulator& sim) : sim_(&sim) {}
  Prediction predict(const PredictionQuery& q) override;

 private:
  // Rollout of the most recent (state, plan); later checkpoints of the same
  // plan extend it instead of restarting.
  const sim::Simulator* sim_;
  sim::WorldState start_;
  std::vector<sim::MotionPrimitive> plan_;
  std::vector<sim::WorldState> states_;
};

class OracleClassifier final : public CatchClassifier {
 public:
  explicit OracleClassifier(const sim::Simulator& sim) : sim_(&sim) {}
  double score(const Prediction& view) override { return oracle_score(*sim_, view.grid); }

 private:
  const sim::Simulator* sim_;
};

// Single forward pass from (I_H0, F, T); never iterates over intermediate
// steps.
class LearnedPredictor final : public PerspectivePredictor {
 public:
  explicit LearnedPredictor(nn::Sequential<float> model);
  Prediction predict(const PredictionQuery& q) override;
  std::vector<Prediction> predict_batch(std::span<const PredictionQuery> qs) override;
  nn::Sequential<float>& model() { return model_; }
  int resolution() const { return resolution_; }

 private:
  std::mutex mu_;
  nn::Sequential<float> model_;
  int resolution_ = 0;
};

class LearnedClassifier final : public CatchClassifier {
 public:
  // With `use_soft`, the classifier reads the unquantized frame when one is
  // available instead of the palette-quantized grid.
  explicit LearnedClassifier(nn::Sequential<float> model, bool use_soft = false);
  double score(const Prediction& view) override;
  std::vector<double> score_batch(std::span<const Prediction> views) override;
  double score_frame(const perception::Raster& frame);
  nn::Sequential<float>& model() { return model_; }
  bool use_soft() const { return use_soft_; }

 private:
  void write_view(const Prediction& view, Tensor& t, int n) const;

  std::mutex mu_;
  nn::Sequential<float> model_;
  bool use_soft_ = false;
  int resolution_ = 0;
};

}  // namespace hideseek::models
