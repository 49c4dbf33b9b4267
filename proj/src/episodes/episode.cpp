#include "episodes/episode.hpp"

#include <fstream>

#include "common/error.hpp"

namespace hideseek::episodes {

using sim::MotionPrimitive;

std::vector<MotionPrimitive> EpisodeRecord::hider_primitives() const {
  std::vector<MotionPrimitive> out;
  out.reserve(steps.size() + hider_tail.size());
  for (const auto& s : steps) out.push_back(s.hider_cmd);
  out.insert(out.end(), hider_tail.begin(), hider_tail.end());
  return out;
}

sim::Pose EpisodeRecord::hider_at(int t) const {
  if (t <= 0 || steps.empty()) return start.hider;
  return steps[static_cast<std::size_t>(std::min<int>(t, static_cast<int>(steps.size())) - 1)].hider;
}

sim::Pose EpisodeRecord::seeker_at(int t) const {
  if (t <= 0 || steps.empty()) return start.seeker;
  return steps[static_cast<std::size_t>(std::min<int>(t, static_cast<int>(steps.size())) - 1)].seeker;
}

EpisodeRecord run_episode(const sim::Simulator& sim, HiderPolicy& policy, std::uint64_t seed,
                          const std::optional<sim::StartPoses>& start) {
  sim::WorldState state = start ? sim.initial_state(*start, seed) : sim.initial_state(seed);
  EpisodeRecord rec;
  rec.scenario_hash = sim::scenario_hash(sim.scenario());
  rec.seed = seed;
  rec.max_steps = sim.scenario().max_steps;
  rec.start = {state.hider, state.seeker};

  while (!state.caught && state.step < rec.max_steps) {
    const MotionPrimitive cmd = policy.next(state.hider, state.step);
    const sim::TickResult r = sim.tick(state, cmd);
    rec.steps.push_back({cmd, state.hider, r.seeker_cmd, state.seeker, state.caught});
  }
  rec.terminal_step = state.step;
  rec.cause = state.caught ? TerminalCause::Caught : TerminalCause::MaxSteps;

  sim::Pose ghost = state.hider;
  for (int t = state.step; t < rec.max_steps; ++t) {
    const MotionPrimitive cmd = policy.next(ghost, t);
    rec.hider_tail.push_back(cmd);
    ghost = sim.move(ghost, cmd);
  }
  return rec;
}

EpisodeRecord replay_episode(const sim::Simulator& sim, const std::vector<MotionPrimitive>& hider_primitives,
                             std::uint64_t seed, const std::optional<sim::StartPoses>& start) {
  SequencePolicy policy(hider_primitives);
  return run_episode(sim, policy, seed, start);
}

std::vector<sim::Pose> hider_trajectory(const sim::Simulator& sim, const EpisodeRecord& rec, int length) {
  std::vector<sim::Pose> out;
  out.reserve(static_cast<std::size_t>(length) + 1);
  out.push_back(rec.start.hider);
  for (int t = 1; t <= length; ++t) {
    if (t <= static_cast<int>(rec.steps.size())) {
      out.push_back(rec.steps[static_cast<std::size_t>(t - 1)].hider);
    } else {
      const auto k = static_cast<std::size_t>(t - 1) - rec.steps.size();
      const MotionPrimitive cmd = k < rec.hider_tail.size() ? rec.hider_tail[k] : MotionPrimitive::Stay;
      out.push_back(sim.move(out.back(), cmd));
    }
  }
  return out;
}

namespace {

std::string cmd_name(MotionPrimitive p) { return std::string(sim::to_string(p)); }

}  // namespace

nlohmann::json to_json(const EpisodeRecord& rec) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : rec.steps) {
    steps.push_back({{"hider_cmd", cmd_name(s.hider_cmd)},
                     {"hider", sim::pose_to_json(s.hider)},
                     {"seeker_cmd", cmd_name(s.seeker_cmd)},
                     {"seeker", sim::pose_to_json(s.seeker)},
                     {"caught", s.caught}});
  }
  nlohmann::json tail = nlohmann::json::array();
  for (auto p : rec.hider_tail) tail.push_back(cmd_name(p));
  return {{"format", "hideseek-episode"},
          {"version", 1},
          {"scenario_hash", rec.scenario_hash},
          {"seed", rec.seed},
          {"max_steps", rec.max_steps},
          {"start", {{"hider", sim::pose_to_json(rec.start.hider)}, {"seeker", sim::pose_to_json(rec.start.seeker)}}},
          {"steps", steps},
          {"terminal_step", rec.terminal_step},
          {"terminal_cause", rec.cause == TerminalCause::Caught ? "Caught" : "MaxSteps"},
          {"hider_tail", tail}};
}

EpisodeRecord episode_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "hideseek-episode" || j.value("version", 0) != 1) {
      fail(Errc::FormatVersionMismatch, "not a version 1 episode record");
    }
    EpisodeRecord rec;
    rec.scenario_hash = j.at("scenario_hash").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.max_steps = j.at("max_steps").get<int>();
    rec.start = {sim::pose_from_json(j.at("start").at("hider")), sim::pose_from_json(j.at("start").at("seeker"))};
    for (const auto& s : j.at("steps")) {
      rec.steps.push_back({sim::parse_primitive(s.at("hider_cmd").get<std::string>()),
                           sim::pose_from_json(s.at("hider")),
                           sim::parse_primitive(s.at("seeker_cmd").get<std::string>()),
                           sim::pose_from_json(s.at("seeker")), s.at("caught").get<bool>()});
    }
    rec.terminal_step = j.at("terminal_step").get<int>();
    rec.cause = j.at("terminal_cause").get<std::string>() == "Caught" ? TerminalCause::Caught : TerminalCause::MaxSteps;
    for (const auto& p : j.at("hider_tail")) rec.hider_tail.push_back(sim::parse_primitive(p.get<std::string>()));
    return rec;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, std::string("malformed episode record: ") + e.what());
  }
}

void save_episode(const EpisodeRecord& rec, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) fail(Errc::Io, "cannot write episode record " + path.string());
  f << to_json(rec).dump(1) << '\n';
  if (!f) fail(Errc::Io, "write failed: " + path.string());
}

EpisodeRecord load_episode(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::Io, "cannot open episode record " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, "episode record is not JSON: " + std::string(e.what()));
  }
  return episode_from_json(j);
}

}  // namespace hideseek::episodes
