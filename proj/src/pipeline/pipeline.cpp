#include "pipeline/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "models/features.hpp"
#include "models/predictors.hpp"

namespace hideseek::pipeline {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json history_json(const std::vector<models::EpochMetrics>& h) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& m : h) out.push_back(models::to_json(m));
  return out;
}

nn::Checkpoint load_kind(const fs::path& path, ModelKind kind) {
  auto ckpt = nn::load_checkpoint(path);
  const auto info = model_info(ckpt);
  if (info.kind != kind) {
    fail(Errc::InvalidArgument, path.string() + " holds a " + (info.kind == ModelKind::Vpt ? "vpt" : "vpn") + " model");
  }
  return ckpt;
}

void require_resolution(const sim::Simulator& sim, const ModelInfo& info, const fs::path& path) {
  if (info.resolution != sim.scenario().obs_resolution) {
    fail(Errc::ShapeMismatch, path.string() + " expects " + std::to_string(info.resolution) +
                                  " px observations, scenario renders " +
                                  std::to_string(sim.scenario().obs_resolution));
  }
}

}  // namespace

ModelInfo model_info(const nn::Checkpoint& ckpt) {
  ModelInfo info;
  try {
    info.meta = nlohmann::json::parse(ckpt.metadata);
    const auto kind = info.meta.at("kind").get<std::string>();
    if (kind == "vpt") {
      info.kind = ModelKind::Vpt;
    } else if (kind == "vpn") {
      info.kind = ModelKind::Vpn;
      info.input = info.meta.value("input", "oracle");
    } else {
      fail(Errc::FormatVersionMismatch, "unknown model kind '" + kind + "'");
    }
    info.resolution = info.meta.at("resolution").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, std::string("bad checkpoint metadata: ") + e.what());
  }
  return info;
}

episodes::EpisodeRecord simulate(const sim::Simulator& sim, std::uint64_t seed, int steps,
                                 episodes::PolicyKind policy, const episodes::HumanTrajectoryBank* bank) {
  if (steps >= 0 && steps != sim.scenario().max_steps) {
    sim::Scenario sc = sim.scenario();
    sc.max_steps = steps;
    const sim::Simulator limited(sc);
    auto pol = episodes::make_policy(policy, limited, seed, bank);
    return episodes::run_episode(limited, *pol, seed);
  }
  auto pol = episodes::make_policy(policy, sim, seed, bank);
  return episodes::run_episode(sim, *pol, seed);
}

nlohmann::json train_vpt(const fs::path& data, const models::TrainConfig& cfg, const fs::path& out,
                         const models::EpochCallback& on_epoch) {
  const auto ds = episodes::read_dataset(data);
  const auto split = models::split_samples(ds.samples);
  auto r = models::train_vpt(split.train, split.val, cfg, on_epoch);
  const double test_mse = split.test.empty() ? 0.0 : models::vpt_mse(r.model, split.test);
  nlohmann::json meta = {{"kind", "vpt"},
                         {"resolution", ds.manifest.width},
                         {"scenario_hash", ds.manifest.scenario_hash},
                         {"train", models::to_json(cfg)},
                         {"initial_val_loss", r.initial_val_loss},
                         {"best_epoch", r.best_epoch}};
  nn::save_checkpoint(r.model, meta.dump(), out);
  meta["history"] = history_json(r.history);
  meta["test_mse"] = test_mse;
  meta["samples"] = {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}};
  meta["warnings"] = r.warnings;
  return meta;
}

nlohmann::json train_vpn(const fs::path& data, const std::optional<fs::path>& vpt, const models::TrainConfig& cfg,
                         const fs::path& out, const models::EpochCallback& on_epoch) {
  const auto ds = episodes::read_dataset(data);
  const auto split = models::split_samples(ds.samples);
  models::FrameSet train, val, test;
  if (vpt) {
    auto ckpt = load_kind(*vpt, ModelKind::Vpt);
    auto frames = models::predicted_frame_split(ckpt.model, split);
    train = std::move(frames.train);
    val = std::move(frames.val);
    test = std::move(frames.test);
  } else {
    train = models::frames_from_samples(split.train);
    val = models::frames_from_samples(split.val);
    test = models::frames_from_samples(split.test);
  }
  auto r = models::train_vpn(train, val, cfg, on_epoch);
  int positives = 0;
  for (float v : train.labels) positives += v > 0.5f;
  nlohmann::json meta = {{"kind", "vpn"},
                         {"input", vpt ? "predicted" : "oracle"},
                         {"resolution", ds.manifest.width},
                         {"scenario_hash", ds.manifest.scenario_hash},
                         {"train", models::to_json(cfg)},
                         {"best_epoch", r.best_epoch}};
  nn::save_checkpoint(r.model, meta.dump(), out);
  meta["history"] = history_json(r.history);
  meta["class_balance"] = {{"caught", positives}, {"free", train.size() - positives}};
  if (test.size() > 0) meta["test_accuracy"] = models::vpn_accuracy(r.model, test);
  meta["warnings"] = r.warnings;
  return meta;
}

nlohmann::json predict(const fs::path& model, const fs::path& record, const fs::path& out_png) {
  auto ckpt = load_kind(model, ModelKind::Vpt);
  std::ifstream in(record, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + record.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  const auto sample = episodes::decode_record(bytes);
  models::LearnedPredictor pred(std::move(ckpt.model));
  models::PredictionQuery q;
  q.t = sample.t_i;
  q.i_h0 = &sample.i_h0;
  q.actions = &sample.actions;
  const auto p = pred.predict(q);
  perception::write_png(p.grid, out_png);
  models::Tensor truth(p.soft.shape);
  models::write_channels(sample.i_s, truth, 0, 0, models::kFrameChannels);
  double se = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) se += std::pow(double(p.soft.data[i]) - truth.data[i], 2);
  long same = 0;
  for (int r = 0; r < p.grid.height; ++r) {
    for (int c = 0; c < p.grid.width; ++c) same += p.grid.at(r, c) == sample.i_s.at(r, c);
  }
  return {{"t_i", sample.t_i},
          {"caught", sample.caught},
          {"mse", se / static_cast<double>(truth.size())},
          {"pixel_accuracy", static_cast<double>(same) / (p.grid.width * p.grid.height)}};
}

Components load_components(const sim::Simulator& sim, const std::optional<fs::path>& vpt,
                           const std::optional<fs::path>& vpn) {
  Components c;
  if (vpt) {
    auto ckpt = load_kind(*vpt, ModelKind::Vpt);
    require_resolution(sim, model_info(ckpt), *vpt);
    c.predictor = std::make_unique<models::LearnedPredictor>(std::move(ckpt.model));
    c.learned_predictor = true;
  } else {
    c.predictor = std::make_unique<models::OraclePredictor>(sim);
  }
  if (vpn) {
    auto ckpt = load_kind(*vpn, ModelKind::Vpn);
    const auto info = model_info(ckpt);
    require_resolution(sim, info, *vpn);
    c.classifier = std::make_unique<models::LearnedClassifier>(std::move(ckpt.model), info.input == "predicted");
    c.learned_classifier = true;
  } else {
    c.classifier = std::make_unique<models::OracleClassifier>(sim);
  }
  return c;
}

PlanResult plan(const sim::Simulator& sim, const sim::WorldState& state, Components& parts,
                const planner::ValueMapConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult r;
  r.map = planner::compute_value_map(sim, state, *parts.predictor, *parts.classifier, cfg);
  r.selected = planner::select_goal(r.map, state.seeker.position());
  r.seconds = seconds_since(t0);
  return r;
}

std::vector<sim::WorldState> evaluation_states(const sim::Simulator& sim, std::uint64_t seed, int count) {
  std::vector<sim::WorldState> out;
  for (int i = 0; i < count; ++i) out.push_back(sim.initial_state(mix_seed(seed, static_cast<std::uint64_t>(i))));
  return out;
}

nlohmann::json evaluate_ranking(const sim::Simulator& sim, Components& parts, std::span<const sim::WorldState> states,
                                std::span<const int> horizons, int interval) {
  const auto results =
      planner::horizon_generalization(sim, states, *parts.predictor, *parts.classifier, horizons, interval);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& h : results) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : h.per_scenario) per.push_back({{"pairs", r.pairs}, {"correct", r.correct}, {"accuracy", r.accuracy}});
    out.push_back({{"horizon", h.horizon}, {"mean_accuracy", h.mean_accuracy}, {"std_accuracy", h.std_accuracy},
                   {"scenarios", per}});
  }
  return out;
}

nlohmann::json evaluate_vpn_accuracy(const fs::path& data, const fs::path& vpn, const std::optional<fs::path>& vpt,
                                     episodes::Split split) {
  const auto ds = episodes::read_dataset(data);
  const auto view = models::split_samples(ds.samples);
  const auto& samples = split == episodes::Split::Train ? view.train : split == episodes::Split::Val ? view.val : view.test;
  if (samples.empty()) fail(Errc::EmptyDataset, "no " + episodes::to_string(split) + " samples in " + data.string());
  models::FrameSet frames;
  if (vpt) {
    auto ckpt = load_kind(*vpt, ModelKind::Vpt);
    frames = models::predicted_frames(ckpt.model, samples);
  } else {
    frames = models::frames_from_samples(samples);
  }
  auto ckpt = load_kind(vpn, ModelKind::Vpn);
  int positives = 0;
  for (float v : frames.labels) positives += v > 0.5f;
  return {{"split", episodes::to_string(split)},
          {"frames", frames.size()},
          {"caught", positives},
          {"accuracy", models::vpn_accuracy(ckpt.model, frames)}};
}

int export_bank(const std::vector<fs::path>& episodes, const fs::path& bank) {
  if (episodes.empty()) fail(Errc::InvalidArgument, "no episode files given");
  int written = 0;
  for (const auto& path : episodes) {
    const auto rec = episodes::load_episode(path);
    episodes::HumanTrajectory t;
    for (const auto& s : rec.steps) t.primitives.push_back(s.hider_cmd);
    t.seed = rec.seed;
    t.start = rec.start;
    episodes::append_to_bank(t, bank);
    ++written;
  }
  return written;
}

}  // namespace hideseek::pipeline
