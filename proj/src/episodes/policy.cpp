#include "episodes/policy.hpp"

#include <fstream>

#include <json.hpp>

#include "common/error.hpp"

namespace hideseek::episodes {

using sim::MotionPrimitive;

MotionPrimitive RandomPolicy::next(const sim::Pose&, int) {
  static constexpr MotionPrimitive kMoves[4] = {MotionPrimitive::Forward, MotionPrimitive::Backward,
                                                MotionPrimitive::RotateLeft, MotionPrimitive::RotateRight};
  return kMoves[rng_.below(4)];
}

MotionPrimitive SequencePolicy::next(const sim::Pose&, int) {
  if (pos_ >= seq_.size()) return MotionPrimitive::Stay;
  return seq_[pos_++];
}

ScriptedPolicy::ScriptedPolicy(const sim::Simulator& sim, std::uint64_t seed) : sim_(&sim), rng_(seed) {
  const auto& nav = sim.nav();
  for (int i = 0; i < nav.cell_count(); ++i) {
    if (nav.free(nav.cell(i))) goals_.push_back(nav.center(nav.cell(i)));
  }
}

void ScriptedPolicy::replan(const sim::Pose& hider) {
  queue_.clear();
  if (goals_.empty()) return;
  const sim::Vec2 goal = goals_[rng_.below(goals_.size())];
  if (const auto path = sim_->plan_path(hider.position(), goal)) {
    const auto prims = sim::path_to_primitives(*path, hider, sim_->nav());
    queue_.assign(prims.begin(), prims.end());
  }
}

MotionPrimitive ScriptedPolicy::next(const sim::Pose& hider, int step) {
  if (step >= next_switch_) {
    replan(hider);
    next_switch_ = step + rng_.range(kMinSwitch, kMaxSwitch);
  }
  if (queue_.empty()) return MotionPrimitive::Stay;
  const MotionPrimitive p = queue_.front();
  queue_.pop_front();
  return p;
}

namespace {

nlohmann::json entry_to_json(const HumanTrajectory& t) {
  nlohmann::json prims = nlohmann::json::array();
  for (auto p : t.primitives) prims.push_back(std::string(sim::to_string(p)));
  nlohmann::json j = {{"primitives", prims}};
  if (t.seed) j["seed"] = *t.seed;
  if (t.start) j["start"] = {{"hider", sim::pose_to_json(t.start->hider)}, {"seeker", sim::pose_to_json(t.start->seeker)}};
  return j;
}

HumanTrajectory entry_from_json(const nlohmann::json& j) {
  HumanTrajectory t;
  for (const auto& p : j.at("primitives")) t.primitives.push_back(sim::parse_primitive(p.get<std::string>()));
  if (t.primitives.empty()) fail(Errc::InvalidArgument, "bank entries must be non-empty");
  if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("start")) {
    t.start = sim::StartPoses{sim::pose_from_json(j.at("start").at("hider")),
                              sim::pose_from_json(j.at("start").at("seeker"))};
  }
  return t;
}

}  // namespace

HumanTrajectoryBank load_bank(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::Io, "cannot open trajectory bank " + path.string());
  try {
    nlohmann::json j;
    f >> j;
    if (j.value("format", "") != "hideseek-bank" || j.value("version", 0) != 1) {
      fail(Errc::FormatVersionMismatch, "unsupported trajectory bank format in " + path.string());
    }
    HumanTrajectoryBank bank;
    for (const auto& e : j.at("trajectories")) bank.trajectories.push_back(entry_from_json(e));
    return bank;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, "malformed trajectory bank " + path.string() + ": " + e.what());
  }
}

void save_bank(const HumanTrajectoryBank& bank, const std::filesystem::path& path) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& t : bank.trajectories) entries.push_back(entry_to_json(t));
  std::ofstream f(path);
  if (!f) fail(Errc::Io, "cannot write trajectory bank " + path.string());
  f << nlohmann::json{{"format", "hideseek-bank"}, {"version", 1}, {"trajectories", entries}}.dump(1) << '\n';
}

void append_to_bank(const HumanTrajectory& entry, const std::filesystem::path& path) {
  if (entry.primitives.empty()) fail(Errc::InvalidArgument, "refusing to store an empty trajectory");
  HumanTrajectoryBank bank;
  if (std::filesystem::exists(path)) bank = load_bank(path);
  bank.trajectories.push_back(entry);
  save_bank(bank, path);
}

std::unique_ptr<SequencePolicy> replay_human(const HumanTrajectoryBank& bank, std::uint64_t seed) {
  if (bank.trajectories.empty()) fail(Errc::EmptyBank, "human trajectory bank is empty");
  Rng rng(mix_seed(seed, 7));
  return std::make_unique<SequencePolicy>(bank.trajectories[rng.below(bank.trajectories.size())].primitives);
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "random") return PolicyKind::Random;
  if (name == "human") return PolicyKind::Human;
  if (name == "scripted") return PolicyKind::Scripted;
  fail(Errc::InvalidArgument, "unknown policy '" + name + "' (expected random, human or scripted)");
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Random: return "random";
    case PolicyKind::Human: return "human";
    case PolicyKind::Scripted: return "scripted";
  }
  return "random";
}

std::unique_ptr<HiderPolicy> make_policy(PolicyKind kind, const sim::Simulator& sim, std::uint64_t seed,
                                         const HumanTrajectoryBank* bank) {
  switch (kind) {
    case PolicyKind::Random: return std::make_unique<RandomPolicy>(mix_seed(seed, 5));
    case PolicyKind::Scripted: return std::make_unique<ScriptedPolicy>(sim, mix_seed(seed, 6));
    case PolicyKind::Human:
      if (!bank) fail(Errc::EmptyBank, "human policy requires a trajectory bank");
      return replay_human(*bank, seed);
  }
  fail(Errc::InvalidArgument, "unknown policy kind");
}

}  // namespace hideseek::episodes
