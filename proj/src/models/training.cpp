#include "models/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "common/rng.hpp"
#include "models/architectures.hpp"
#include "nn/augment.hpp"
#include "nn/loss.hpp"

namespace hideseek::models {

using episodes::TrainingSample;

void TrainConfig::validate() const {
  if (epochs < 1) fail(Errc::InvalidArgument, "epochs must be positive");
  if (batch < 1 || micro_batch < 1) fail(Errc::InvalidArgument, "batch sizes must be positive");
  if (!(width > 0.0)) fail(Errc::InvalidArgument, "width multiplier must be positive");
  if (max_steps < 0) fail(Errc::InvalidArgument, "max_steps must be non-negative");
  schedule().validate();
}

TrainConfig vpt_defaults() {
  TrainConfig c;
  c.lr = 0.001;
  c.batch = 256;
  c.milestones = {0.25, 0.65};
  return c;
}

TrainConfig vpn_defaults() {
  TrainConfig c;
  c.epochs = 100;
  c.lr = 0.0005;
  c.batch = 256;
  c.milestones = {0.2, 0.5};
  c.augment = true;
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch", c.batch},         {"micro_batch", c.micro_batch},
          {"lr", c.lr},                 {"milestones", c.milestones}, {"decay", c.decay},
          {"seed", c.seed},             {"width", c.width},         {"augment", c.augment},
          {"keep_best", c.keep_best},   {"max_steps", c.max_steps}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) fail(Errc::InvalidArgument, "training config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "batch") c.batch = v.get<int>();
    else if (key == "micro_batch") c.micro_batch = v.get<int>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "milestones") c.milestones = v.get<std::vector<double>>();
    else if (key == "decay") c.decay = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "width") c.width = v.get<double>();
    else if (key == "augment") c.augment = v.get<bool>();
    else if (key == "keep_best") c.keep_best = v.get<bool>();
    else if (key == "max_steps") c.max_steps = v.get<long long>();
    else fail(Errc::InvalidArgument, "unknown training option '" + key + "'");
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const EpochMetrics& m) {
  nlohmann::json j = {{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"val_loss", m.val_loss},
                      {"lr", m.lr},       {"steps", m.steps},           {"seconds", m.seconds}};
  if (m.val_accuracy) j["val_accuracy"] = *m.val_accuracy;
  return j;
}

namespace {

struct Loop {
  int n = 0;
  std::function<void(std::span<const int>, Tensor&, Rng&)> fill;
  std::function<nn::LossResult<float>(const Tensor&, std::span<const int>)> loss;
  std::function<double(std::span<const int>)> mass;
  // Validation loss and optional accuracy; accuracy decides "best" when set.
  std::function<std::pair<double, std::optional<double>>(nn::Sequential<float>&)> validate;
};

std::vector<std::vector<float>> snapshot(nn::Sequential<float>& m) {
  std::vector<std::vector<float>> s;
  for (auto* p : m.params()) s.push_back(p->value);
  return s;
}

void restore(nn::Sequential<float>& m, const std::vector<std::vector<float>>& s) {
  auto ps = m.params();
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = s[i];
}

void train_loop(nn::Sequential<float>& model, const Loop& loop, const TrainConfig& cfg, const EpochCallback& cb,
                TrainResult& result) {
  using clock = std::chrono::steady_clock;
  const int steps_per_epoch = (loop.n + cfg.batch - 1) / cfg.batch;
  long long total = static_cast<long long>(steps_per_epoch) * cfg.epochs;
  if (cfg.max_steps > 0) total = std::min(total, cfg.max_steps);
  const auto schedule = cfg.schedule();
  nn::Adam<float> adam(model.params());

  auto [v0, a0] = loop.validate(model);
  result.initial_val_loss = v0;
  double best_loss = v0;
  std::optional<double> best_acc = a0;
  auto best = snapshot(model);
  result.best_epoch = 0;

  std::vector<int> order(static_cast<std::size_t>(loop.n));
  long long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs && step < total; ++epoch) {
    const auto t0 = clock::now();
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(cfg.seed, 100 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    Rng aug_rng(mix_seed(cfg.seed, 200 + static_cast<std::uint64_t>(epoch)));

    double loss_sum = 0.0;
    double mass_sum = 0.0;
    double lr = 0.0;
    for (int b = 0; b < steps_per_epoch && step < total; ++b, ++step) {
      const int begin = b * cfg.batch;
      const int end = std::min(loop.n, begin + cfg.batch);
      const std::span<const int> batch(order.data() + begin, static_cast<std::size_t>(end - begin));
      const double batch_mass = loop.mass(batch);
      model.zero_grad();
      for (std::size_t m = 0; m < batch.size(); m += static_cast<std::size_t>(cfg.micro_batch)) {
        const auto chunk = batch.subspan(m, std::min<std::size_t>(cfg.micro_batch, batch.size() - m));
        Tensor x(model.input_shape(static_cast<int>(chunk.size())));
        loop.fill(chunk, x, aug_rng);
        const Tensor y = model.forward(x, true);
        auto l = loop.loss(y, chunk);
        const double share = loop.mass(chunk) / batch_mass;
        for (auto& g : l.grad.data) g = static_cast<float>(g * share);
        model.backward(l.grad);
        loss_sum += l.value * loop.mass(chunk);
        mass_sum += loop.mass(chunk);
      }
      lr = schedule.at(static_cast<double>(step) / static_cast<double>(total));
      adam.step(lr);
    }
    model.clear_cache();

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = mass_sum > 0 ? loss_sum / mass_sum : 0.0;
    auto [vl, va] = loop.validate(model);
    em.val_loss = vl;
    em.val_accuracy = va;
    em.lr = lr;
    em.steps = step;
    em.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    result.history.push_back(em);
    if (cb) cb(em);

    const bool better = va && best_acc ? *va > *best_acc : vl < best_loss;
    if (better) {
      best_loss = vl;
      best_acc = va;
      best = snapshot(model);
      result.best_epoch = epoch;
    }
  }
  if (cfg.keep_best) {
    restore(model, best);
  } else {
    result.best_epoch = static_cast<int>(result.history.size());
  }
}

int sample_resolution(const std::vector<const TrainingSample*>& s) {
  if (s.empty()) fail(Errc::EmptyDataset, "no training samples");
  const int r = s.front()->i_s.width;
  for (const auto* x : s) {
    if (x->i_s.width != r || x->i_s.height != r || x->i_h0.width != r || x->actions.visitation.width != r) {
      fail(Errc::ShapeMismatch, "training rasters must share one square resolution");
    }
  }
  return r;
}

void fill_vpt(const std::vector<const TrainingSample*>& s, std::span<const int> idx, Tensor& x) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& smp = *s[static_cast<std::size_t>(idx[i])];
    write_vpt_input(smp.i_h0, smp.actions, x, static_cast<int>(i));
  }
}

void fill_targets(const std::vector<const TrainingSample*>& s, std::span<const int> idx, Tensor& y) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    write_channels(s[static_cast<std::size_t>(idx[i])]->i_s, y, static_cast<int>(i), 0, kFrameChannels);
  }
}

}  // namespace

double vpt_mse(nn::Sequential<float>& model, const std::vector<const TrainingSample*>& samples, int batch) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  std::vector<int> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t b = 0; b < samples.size(); b += static_cast<std::size_t>(batch)) {
    const auto chunk = std::span<const int>(idx).subspan(b, std::min<std::size_t>(batch, samples.size() - b));
    const int n = static_cast<int>(chunk.size());
    Tensor x(model.input_shape(n));
    fill_vpt(samples, chunk, x);
    const Tensor y = model.forward(x, false);
    Tensor t(y.shape);
    fill_targets(samples, chunk, t);
    sum += nn::mse(y, t).value * n;
  }
  model.clear_cache();
  return sum / static_cast<double>(samples.size());
}

TrainResult train_vpt(const std::vector<const TrainingSample*>& train, const std::vector<const TrainingSample*>& val,
                      const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) fail(Errc::EmptyDataset, "VPT training needs at least one sample");
  const int res = sample_resolution(train);
  TrainResult result{nn::Sequential<float>(kVptInputChannels, res, res, vpt_architecture(res, cfg.width), cfg.seed),
                     {}, 0.0, 0, {}};
  if (val.empty()) result.warnings.push_back("empty validation split; validating on the training split");
  const auto& vset = val.empty() ? train : val;

  Loop loop;
  loop.n = static_cast<int>(train.size());
  // Rotating inputs and target together by one angle gives a rotated but
  // equally valid episode.
  std::vector<int> turns;
  loop.fill = [&](std::span<const int> idx, Tensor& x, Rng& rng) {
    fill_vpt(train, idx, x);
    turns.assign(idx.size(), 0);
    if (!cfg.augment) return;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      turns[i] = static_cast<int>(rng.below(4));
      nn::rotate90_item(x, static_cast<int>(i), turns[i]);
    }
  };
  loop.loss = [&](const Tensor& y, std::span<const int> idx) {
    Tensor t(y.shape);
    fill_targets(train, idx, t);
    for (std::size_t i = 0; i < idx.size(); ++i) nn::rotate90_item(t, static_cast<int>(i), turns[i]);
    return nn::mse(y, t);
  };
  loop.mass = [](std::span<const int> idx) { return static_cast<double>(idx.size()); };
  loop.validate = [&](nn::Sequential<float>& m) {
    return std::pair<double, std::optional<double>>{vpt_mse(m, vset), std::nullopt};
  };
  train_loop(result.model, loop, cfg, on_epoch, result);
  return result;
}

FrameSet frames_from_samples(const std::vector<const TrainingSample*>& samples) {
  FrameSet fs;
  if (samples.empty()) return fs;
  const int res = sample_resolution(samples);
  fs.frames = Tensor({static_cast<int>(samples.size()), kFrameChannels, res, res});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    write_channels(samples[i]->i_s, fs.frames, static_cast<int>(i), 0, kFrameChannels);
    fs.labels.push_back(samples[i]->caught ? 1.0f : 0.0f);
  }
  return fs;
}

FrameSet predicted_frames(nn::Sequential<float>& vpt, const std::vector<const TrainingSample*>& samples, int batch) {
  FrameSet fs;
  if (samples.empty()) return fs;
  const nn::Shape out = vpt.output_shape(static_cast<int>(samples.size()));
  fs.frames = Tensor(out);
  std::vector<int> idx(samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t b = 0; b < samples.size(); b += static_cast<std::size_t>(batch)) {
    const auto chunk = std::span<const int>(idx).subspan(b, std::min<std::size_t>(batch, samples.size() - b));
    Tensor x(vpt.input_shape(static_cast<int>(chunk.size())));
    fill_vpt(samples, chunk, x);
    const Tensor y = vpt.forward(x, false);
    std::copy(y.data.begin(), y.data.end(), fs.frames.item(static_cast<int>(b)));
  }
  vpt.clear_cache();
  for (const auto* s : samples) fs.labels.push_back(s->caught ? 1.0f : 0.0f);
  return fs;
}

std::vector<float> vpn_scores(nn::Sequential<float>& model, const FrameSet& set, int batch) {
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(set.size()));
  const auto per = set.frames.shape.per_item();
  for (int b = 0; b < set.size(); b += batch) {
    const int n = std::min(batch, set.size() - b);
    Tensor x(model.input_shape(n));
    std::copy(set.frames.item(b), set.frames.item(b) + n * per, x.data.begin());
    const Tensor y = model.forward(x, false);
    out.insert(out.end(), y.data.begin(), y.data.end());
  }
  model.clear_cache();
  return out;
}

double vpn_accuracy(nn::Sequential<float>& model, const FrameSet& set, int batch) {
  if (set.size() == 0) return 0.0;
  const auto s = vpn_scores(model, set, batch);
  int correct = 0;
  for (int i = 0; i < set.size(); ++i) correct += (s[i] >= 0.5f) == (set.labels[i] >= 0.5f);
  return static_cast<double>(correct) / set.size();
}

TrainResult train_vpn(const FrameSet& train, const FrameSet& val, const TrainConfig& cfg,
                      const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0) fail(Errc::EmptyDataset, "VPN training needs at least one frame");
  const nn::Shape fs = train.frames.shape;
  if (fs.c != kFrameChannels || fs.h != fs.w) fail(Errc::ShapeMismatch, "VPN frames must be square RGB");
  if (val.size() > 0 && (val.frames.shape.c != fs.c || val.frames.shape.h != fs.h)) {
    fail(Errc::ShapeMismatch, "validation frames differ from training frames");
  }
  TrainResult result{nn::Sequential<float>(fs.c, fs.h, fs.w, vpn_architecture(fs.h, fs.c, cfg.width), cfg.seed),
                     {}, 0.0, 0, {}};

  const double pos = std::count_if(train.labels.begin(), train.labels.end(), [](float v) { return v >= 0.5f; });
  const double neg = train.size() - pos;
  double w_pos = 1.0;
  double w_neg = 1.0;
  if (pos == 0 || neg == 0) {
    result.warnings.push_back("single-class training set; class weighting disabled");
  } else {
    w_pos = train.size() / (2.0 * pos);
    w_neg = train.size() / (2.0 * neg);
  }
  std::vector<float> weights(train.labels.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = static_cast<float>(train.labels[i] >= 0.5f ? w_pos : w_neg);
  }
  if (val.size() == 0) result.warnings.push_back("empty validation split; validating on the training split");
  const FrameSet& vset = val.size() == 0 ? train : val;
  const auto per = fs.per_item();

  Loop loop;
  loop.n = train.size();
  loop.fill = [&](std::span<const int> idx, Tensor& x, Rng& rng) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy(train.frames.item(idx[i]), train.frames.item(idx[i]) + per, x.item(static_cast<int>(i)));
      if (cfg.augment) nn::rotate90_item(x, static_cast<int>(i), static_cast<int>(rng.below(4)));
    }
  };
  loop.loss = [&](const Tensor& y, std::span<const int> idx) {
    std::vector<float> labels;
    std::vector<float> w;
    for (int i : idx) {
      labels.push_back(train.labels[static_cast<std::size_t>(i)]);
      w.push_back(weights[static_cast<std::size_t>(i)]);
    }
    return nn::bce(y, labels, w);
  };
  loop.mass = [&](std::span<const int> idx) {
    double m = 0.0;
    for (int i : idx) m += weights[static_cast<std::size_t>(i)];
    return m;
  };
  loop.validate = [&](nn::Sequential<float>& m) {
    const auto s = vpn_scores(m, vset);
    Tensor p({vset.size(), 1, 1, 1});
    std::copy(s.begin(), s.end(), p.data.begin());
    int correct = 0;
    for (int i = 0; i < vset.size(); ++i) correct += (s[i] >= 0.5f) == (vset.labels[i] >= 0.5f);
    return std::pair<double, std::optional<double>>{nn::bce(p, vset.labels).value,
                                                    static_cast<double>(correct) / vset.size()};
  };
  train_loop(result.model, loop, cfg, on_epoch, result);
  return result;
}

SplitView split_samples(const std::vector<TrainingSample>& samples) {
  SplitView v;
  for (const auto& s : samples) {
    switch (s.split) {
      case episodes::Split::Train: v.train.push_back(&s); break;
      case episodes::Split::Val: v.val.push_back(&s); break;
      case episodes::Split::Test: v.test.push_back(&s); break;
    }
  }
  return v;
}

PredictedFrameSplit predicted_frame_split(nn::Sequential<float>& vpt, const SplitView& split) {
  std::vector<const TrainingSample*> train = split.train;
  std::vector<const TrainingSample*> val;
  for (const auto* s : split.val) (s->episode % 2 == 0 ? train : val).push_back(s);
  if (val.empty()) val = split.val;
  return {predicted_frames(vpt, train), predicted_frames(vpt, val), predicted_frames(vpt, split.test)};
}

}  // namespace hideseek::models
