#include "models/predictors.hpp"

#include <algorithm>

#include "perception/render.hpp"

namespace hideseek::models {

std::vector<Prediction> PerspectivePredictor::predict_batch(std::span<const PredictionQuery> qs) {
  std::vector<Prediction> out;
  out.reserve(qs.size());
  for (const auto& q : qs) out.push_back(predict(q));
  return out;
}

std::vector<double> CatchClassifier::score_batch(std::span<const Prediction> views) {
  std::vector<double> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(score(v));
  return out;
}

perception::ObservationGrid oracle_predict(const sim::Simulator& sim, const sim::WorldState& s0,
                                           std::span<const sim::MotionPrimitive> plan, int t) {
  if (t < 0) fail(Errc::InvalidArgument, "checkpoint must be non-negative");
  if (static_cast<int>(plan.size()) < t) fail(Errc::PlanTooShort, "plan shorter than the requested checkpoint");
  sim::WorldState s = s0;
  for (int k = 0; k < t; ++k) sim.tick(s, plan[static_cast<std::size_t>(k)]);
  return sim.seeker_view(s);
}

double oracle_score(const sim::Simulator& sim, const perception::ObservationGrid& view) {
  const auto robots = perception::decode_positions(view, sim.raster(), sim.scenario().robot_radius_mm);
  if (!robots.other_mm) return 0.0;
  return sim::distance(robots.self_mm, *robots.other_mm) <= sim.scenario().catch_radius_mm ? 1.0 : 0.0;
}

Prediction OraclePredictor::predict(const PredictionQuery& q) {
  if (!q.state) fail(Errc::InvalidArgument, "oracle prediction needs the world state");
  if (q.t < 0) fail(Errc::InvalidArgument, "checkpoint must be non-negative");
  if (static_cast<int>(q.plan.size()) < q.t) fail(Errc::PlanTooShort, "plan shorter than the requested checkpoint");
  const bool same = !states_.empty() && start_ == *q.state && plan_.size() == q.plan.size() &&
                    std::equal(plan_.begin(), plan_.end(), q.plan.begin());
  if (!same) {
    start_ = *q.state;
    plan_.assign(q.plan.begin(), q.plan.end());
    states_.assign(1, start_);
  }
  while (static_cast<int>(states_.size()) <= q.t) {
    sim::WorldState s = states_.back();
    sim_->tick(s, plan_[states_.size() - 1]);
    states_.push_back(std::move(s));
  }
  return {sim_->seeker_view(states_[static_cast<std::size_t>(q.t)]), {}};
}

LearnedPredictor::LearnedPredictor(nn::Sequential<float> model) : model_(std::move(model)) {
  const auto in = model_.input_shape(1);
  const auto out = model_.output_shape(1);
  if (in.c != kVptInputChannels || out.c != kFrameChannels || in.h != out.h || in.w != out.w || in.h != in.w) {
    fail(Errc::ShapeMismatch, "model is not a perspective predictor");
  }
  resolution_ = in.h;
}

Prediction LearnedPredictor::predict(const PredictionQuery& q) { return std::move(predict_batch({&q, 1}).front()); }

std::vector<Prediction> LearnedPredictor::predict_batch(std::span<const PredictionQuery> qs) {
  std::vector<Prediction> out;
  if (qs.empty()) return out;
  Tensor x(model_.input_shape(static_cast<int>(qs.size())));
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (!qs[i].i_h0 || !qs[i].actions) fail(Errc::InvalidArgument, "learned prediction needs I_H0 and F/T");
    write_vpt_input(*qs[i].i_h0, *qs[i].actions, x, static_cast<int>(i));
  }
  Tensor y;
  {
    std::lock_guard lock(mu_);
    y = model_.forward(x, false);
    model_.clear_cache();
  }
  out.reserve(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    out.push_back({quantize(y, static_cast<int>(i)), item_copy(y, static_cast<int>(i))});
  }
  return out;
}

LearnedClassifier::LearnedClassifier(nn::Sequential<float> model, bool use_soft)
    : model_(std::move(model)), use_soft_(use_soft) {
  const auto in = model_.input_shape(1);
  const auto out = model_.output_shape(1);
  if (in.c != kFrameChannels || out.per_item() != 1 || in.h != in.w) {
    fail(Errc::ShapeMismatch, "model is not a catch classifier");
  }
  resolution_ = in.h;
}

void LearnedClassifier::write_view(const Prediction& view, Tensor& t, int n) const {
  if (use_soft_ && !view.soft.data.empty()) {
    nn::require_shape(view.soft.shape, nn::Shape{1, kFrameChannels, resolution_, resolution_}, "soft view");
    std::copy(view.soft.data.begin(), view.soft.data.end(), t.item(n));
  } else {
    write_channels(view.grid, t, n, 0, kFrameChannels);
  }
}

double LearnedClassifier::score(const Prediction& view) { return score_batch({&view, 1}).front(); }

std::vector<double> LearnedClassifier::score_batch(std::span<const Prediction> views) {
  std::vector<double> out;
  if (views.empty()) return out;
  Tensor x(model_.input_shape(static_cast<int>(views.size())));
  for (std::size_t i = 0; i < views.size(); ++i) write_view(views[i], x, static_cast<int>(i));
  Tensor y;
  {
    std::lock_guard lock(mu_);
    y = model_.forward(x, false);
    model_.clear_cache();
  }
  out.assign(y.data.begin(), y.data.end());
  return out;
}

double LearnedClassifier::score_frame(const perception::Raster& frame) {
  Tensor x(model_.input_shape(1));
  write_channels(frame, x, 0, 0, kFrameChannels);
  std::lock_guard lock(mu_);
  const Tensor y = model_.forward(x, false);
  model_.clear_cache();
  return y.data.front();
}

}  // namespace hideseek::models
