#include "planner/value_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "perception/action_embedding.hpp"

namespace hideseek::planner {

using sim::MotionPrimitive;

GoalLattice make_lattice(const sim::Simulator& sim, const sim::Pose& hider, int side) {
  if (side < 1) fail(Errc::InvalidArgument, "lattice side must be positive");
  const auto& nav = sim.nav();
  const auto start = nav.nearest_free(nav.cell_of(hider.position()));
  GoalLattice lat;
  lat.side = side;
  const double w = sim.arena().width_mm;
  const double h = sim.arena().height_mm;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      Goal g;
      g.index = r * side + c;
      g.row = r;
      g.col = c;
      g.xy = {(c + 1) * w / (side + 1), (r + 1) * h / (side + 1)};
      const auto cell = nav.cell_of(g.xy);
      g.valid = start && nav.free(cell) && astar(*start, cell, nav).has_value();
      lat.goals.push_back(g);
    }
  }
  return lat;
}

std::vector<int> checkpoints(int horizon, int interval) {
  if (horizon < 0 || interval < 1) fail(Errc::InvalidArgument, "horizon and interval must be positive");
  std::vector<int> out;
  for (int k = 1; k * interval <= horizon; ++k) out.push_back(k * interval - 1);
  return out;
}

std::vector<MotionPrimitive> plan_to_goal(const sim::Simulator& sim, const sim::Pose& hider, sim::Vec2 goal,
                                          int horizon) {
  const auto& nav = sim.nav();
  const auto goal_cell = nav.cell_of(goal);
  if (!nav.free(goal_cell)) fail(Errc::NoPath, "goal lies inside an inflated obstacle");
  const auto start = nav.nearest_free(nav.cell_of(hider.position()));
  if (!start) fail(Errc::NoPath, "no free cell near the hider");
  const auto path = astar(*start, goal_cell, nav);
  if (!path) fail(Errc::NoPath, "goal unreachable");
  auto plan = sim::path_to_primitives(*path, hider, nav);
  plan.resize(static_cast<std::size_t>(std::max(0, horizon)), MotionPrimitive::Stay);
  return plan;
}

std::vector<sim::Pose> hider_rollout(const sim::Simulator& sim, const sim::Pose& start,
                                     std::span<const MotionPrimitive> plan) {
  std::vector<sim::Pose> out{start};
  out.reserve(plan.size() + 1);
  for (auto p : plan) out.push_back(sim.move(out.back(), p));
  return out;
}

namespace {

ValueMap empty_map(const sim::Simulator& sim, const sim::WorldState& state, const ValueMapConfig& cfg) {
  ValueMap m;
  m.lattice = make_lattice(sim, state.hider, cfg.side);
  m.horizon = cfg.horizon;
  m.interval = cfg.interval;
  m.k_max = static_cast<int>(checkpoints(cfg.horizon, cfg.interval).size());
  m.risk.assign(m.lattice.goals.size(), std::nullopt);
  return m;
}

}  // namespace

ValueMap compute_value_map(const sim::Simulator& sim, const sim::WorldState& state,
                           models::PerspectivePredictor& predictor, models::CatchClassifier& classifier,
                           const ValueMapConfig& cfg) {
  ValueMap m = empty_map(sim, state, cfg);
  const auto ts = checkpoints(cfg.horizon, cfg.interval);
  sim::WorldState s0 = state;
  const auto i_h0 = sim.hider_view(s0);
  for (const auto& g : m.lattice.goals) {
    if (!g.valid) continue;
    std::vector<MotionPrimitive> plan;
    try {
      plan = plan_to_goal(sim, state.hider, g.xy, cfg.horizon);
    } catch (const Error& e) {
      if (e.code() != Errc::NoPath) throw;
      m.lattice.goals[static_cast<std::size_t>(g.index)].valid = false;
      continue;
    }
    const auto traj = hider_rollout(sim, state.hider, plan);
    std::vector<perception::ActionEmbedding> actions;
    actions.reserve(ts.size());
    for (int t : ts) {
      actions.push_back(perception::encode_actions(std::span(traj.data(), static_cast<std::size_t>(t) + 1), sim.raster()));
    }
    std::vector<models::PredictionQuery> qs;
    for (std::size_t k = 0; k < ts.size(); ++k) qs.push_back({&s0, plan, ts[k], &i_h0, &actions[k]});
    const auto preds = predictor.predict_batch(qs);
    const auto scores = classifier.score_batch(preds);
    int v = 0;
    for (double s : scores) v += s >= 0.5;
    m.risk[static_cast<std::size_t>(g.index)] = v;
  }
  return m;
}

ValueMap brute_force_value_map(const sim::Simulator& sim, const sim::WorldState& state, const ValueMapConfig& cfg) {
  ValueMap m = empty_map(sim, state, cfg);
  const auto ts = checkpoints(cfg.horizon, cfg.interval);
  for (const auto& g : m.lattice.goals) {
    if (!g.valid) continue;
    std::vector<MotionPrimitive> plan;
    try {
      plan = plan_to_goal(sim, state.hider, g.xy, cfg.horizon);
    } catch (const Error& e) {
      if (e.code() != Errc::NoPath) throw;
      m.lattice.goals[static_cast<std::size_t>(g.index)].valid = false;
      continue;
    }
    sim::WorldState s = state;
    int v = 0;
    std::size_t next = 0;
    for (int step = 1; step <= cfg.horizon && next < ts.size(); ++step) {
      sim.tick(s, plan[static_cast<std::size_t>(step - 1)]);
      if (step == ts[next]) {
        v += s.caught;
        ++next;
      }
    }
    // t_k = 0 is never a checkpoint, so the loop above covers every one.
    m.risk[static_cast<std::size_t>(g.index)] = v;
  }
  return m;
}

int select_goal(const ValueMap& map, sim::Vec2 seeker) {
  int best = -1;
  int best_s = 0;
  double best_d = 0.0;
  for (std::size_t i = 0; i < map.risk.size(); ++i) {
    const auto s = map.safety(i);
    if (!s || !map.lattice.goals[i].valid) continue;
    const double d = sim::distance(map.lattice.goals[i].xy, seeker);
    if (best < 0 || *s > best_s || (*s == best_s && d > best_d)) {
      best = static_cast<int>(i);
      best_s = *s;
      best_d = d;
    }
  }
  if (best < 0) fail(Errc::NoValidGoal, "value map has no valid goal");
  return best;
}

namespace {

bool has_value(const ValueMap& m, std::size_t i) { return m.lattice.goals[i].valid && m.risk[i].has_value(); }

std::vector<double> safety_vector(const ValueMap& m) {
  std::vector<double> out(m.risk.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (has_value(m, i)) out[i] = *m.safety(i);
  }
  return out;
}

}  // namespace

std::vector<GoalPair> ranking_pairs(const ValueMap& truth, double min_distance) {
  std::vector<GoalPair> out;
  const auto& goals = truth.lattice.goals;
  for (std::size_t a = 0; a < goals.size(); ++a) {
    if (!has_value(truth, a)) continue;
    for (std::size_t b = a + 1; b < goals.size(); ++b) {
      if (!has_value(truth, b)) continue;
      const double dr = goals[a].row - goals[b].row;
      const double dc = goals[a].col - goals[b].col;
      if (std::sqrt(dr * dr + dc * dc) < min_distance) continue;
      if (*truth.risk[a] == *truth.risk[b]) continue;
      out.push_back({static_cast<int>(a), static_cast<int>(b)});
    }
  }
  return out;
}

RankingReport ranking_accuracy(std::span<const double> predicted, std::span<const double> truth,
                               std::span<const GoalPair> pairs) {
  if (predicted.size() != truth.size()) fail(Errc::LatticeMismatch, "value vectors differ in length");
  RankingReport r;
  for (const auto& p : pairs) {
    if (p.a < 0 || p.b < 0 || static_cast<std::size_t>(std::max(p.a, p.b)) >= truth.size()) {
      fail(Errc::InvalidArgument, "goal pair out of range");
    }
    const double dt = truth[static_cast<std::size_t>(p.a)] - truth[static_cast<std::size_t>(p.b)];
    const double dp = predicted[static_cast<std::size_t>(p.a)] - predicted[static_cast<std::size_t>(p.b)];
    ++r.pairs;
    if ((dt > 0 && dp > 0) || (dt < 0 && dp < 0)) ++r.correct;
  }
  r.accuracy = r.pairs ? static_cast<double>(r.correct) / r.pairs : 0.0;
  return r;
}

RankingReport ranking_accuracy(const ValueMap& predicted, const ValueMap& truth, double min_distance) {
  if (predicted.lattice.side != truth.lattice.side || predicted.risk.size() != truth.risk.size() ||
      predicted.k_max != truth.k_max) {
    fail(Errc::LatticeMismatch, "value maps use different lattices or horizons");
  }
  for (std::size_t i = 0; i < truth.lattice.goals.size(); ++i) {
    if (predicted.lattice.goals[i].xy != truth.lattice.goals[i].xy) {
      fail(Errc::LatticeMismatch, "value maps use different goal positions");
    }
  }
  std::vector<GoalPair> pairs;
  for (const auto& p : ranking_pairs(truth, min_distance)) {
    if (has_value(predicted, static_cast<std::size_t>(p.a)) && has_value(predicted, static_cast<std::size_t>(p.b))) {
      pairs.push_back(p);
    }
  }
  const auto ps = safety_vector(predicted);
  const auto ts = safety_vector(truth);
  auto r = ranking_accuracy(ps, ts, pairs);
  r.min_distance = min_distance;
  return r;
}

std::vector<HorizonResult> horizon_generalization(const sim::Simulator& sim, std::span<const sim::WorldState> states,
                                                  models::PerspectivePredictor& predictor,
                                                  models::CatchClassifier& classifier, std::span<const int> horizons,
                                                  int interval) {
  std::vector<HorizonResult> out;
  for (int h : horizons) {
    HorizonResult hr;
    hr.horizon = h;
    const ValueMapConfig cfg{h, interval, 11};
    std::vector<double> accs;
    for (const auto& s : states) {
      const auto pred = compute_value_map(sim, s, predictor, classifier, cfg);
      const auto truth = brute_force_value_map(sim, s, cfg);
      hr.per_scenario.push_back(ranking_accuracy(pred, truth));
      if (hr.per_scenario.back().pairs > 0) accs.push_back(hr.per_scenario.back().accuracy);
    }
    if (!accs.empty()) {
      double sum = 0.0;
      for (double a : accs) sum += a;
      hr.mean_accuracy = sum / accs.size();
      double var = 0.0;
      for (double a : accs) var += (a - hr.mean_accuracy) * (a - hr.mean_accuracy);
      hr.std_accuracy = std::sqrt(var / accs.size());
    }
    out.push_back(std::move(hr));
  }
  return out;
}

nlohmann::json to_json(const ValueMap& map, std::optional<int> selected) {
  nlohmann::json goals = nlohmann::json::array();
  for (std::size_t i = 0; i < map.lattice.goals.size(); ++i) {
    const auto& g = map.lattice.goals[i];
    nlohmann::json e = {{"index", g.index}, {"row", g.row}, {"col", g.col}, {"goal_xy", {g.xy.x, g.xy.y}},
                        {"valid", g.valid && map.risk[i].has_value()}};
    if (e["valid"].get<bool>()) {
      e["V"] = *map.risk[i];
      e["S"] = *map.safety(i);
    } else {
      e["V"] = nullptr;
      e["S"] = nullptr;
    }
    goals.push_back(std::move(e));
  }
  nlohmann::json j = {{"format", "hideseek-valuemap"},
                      {"version", 1},
                      {"side", map.lattice.side},
                      {"horizon", map.horizon},
                      {"interval", map.interval},
                      {"k_max", map.k_max},
                      {"goals", goals}};
  if (selected) j["selected"] = *selected;
  return j;
}

ValueMap value_map_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "hideseek-valuemap" || j.value("version", 0) != 1) {
      fail(Errc::FormatVersionMismatch, "not a version 1 value map");
    }
    ValueMap m;
    m.lattice.side = j.at("side").get<int>();
    m.horizon = j.at("horizon").get<int>();
    m.interval = j.at("interval").get<int>();
    m.k_max = j.at("k_max").get<int>();
    for (const auto& e : j.at("goals")) {
      Goal g;
      g.index = e.at("index").get<int>();
      g.row = e.at("row").get<int>();
      g.col = e.at("col").get<int>();
      g.xy = {e.at("goal_xy").at(0).get<double>(), e.at("goal_xy").at(1).get<double>()};
      g.valid = e.at("valid").get<bool>();
      m.lattice.goals.push_back(g);
      m.risk.push_back(g.valid ? std::optional<int>(e.at("V").get<int>()) : std::nullopt);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, std::string("malformed value map: ") + e.what());
  }
}

void save_value_map(const ValueMap& map, const std::filesystem::path& path, std::optional<int> selected) {
  std::ofstream f(path);
  if (!f) fail(Errc::Io, "cannot write " + path.string());
  f << to_json(map, selected).dump(1) << '\n';
  if (!f) fail(Errc::Io, "write failed: " + path.string());
}

ValueMap load_value_map(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, std::string("malformed value map: ") + e.what());
  }
  return value_map_from_json(j);
}

perception::Raster render_heatmap(const sim::Simulator& sim, const ValueMap& map, int cell_px) {
  if (cell_px < 1) fail(Errc::InvalidArgument, "cell size must be positive");
  const int side = map.lattice.side;
  const int size = (side + 1) * cell_px;
  perception::Raster img(size, size, {255, 255, 255, 255});
  const double sx = sim.arena().width_mm / size;
  const double sy = sim.arena().height_mm / size;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const sim::Vec2 p{(c + 0.5) * sx, (r + 0.5) * sy};
      for (const auto& o : sim.arena().obstacles) {
        if (o.contains(p)) img.set(r, c, {0, 0, 0, 255});
      }
    }
  }
  const int half = cell_px / 2;
  for (std::size_t i = 0; i < map.lattice.goals.size(); ++i) {
    const auto& g = map.lattice.goals[i];
    perception::Rgba color{160, 160, 160, 255};
    if (g.valid && map.risk[i]) {
      const double danger = map.k_max > 0 ? static_cast<double>(*map.risk[i]) / map.k_max : 0.0;
      color = {static_cast<std::uint8_t>(std::lround(255 * danger)), 0,
               static_cast<std::uint8_t>(std::lround(255 * (1.0 - danger))), 255};
    }
    const int cr = static_cast<int>(g.xy.y / sy);
    const int cc = static_cast<int>(g.xy.x / sx);
    for (int r = cr - half + 2; r < cr + half - 1; ++r) {
      for (int c = cc - half + 2; c < cc + half - 1; ++c) {
        if (r >= 0 && c >= 0 && r < size && c < size) img.set(r, c, color);
      }
    }
  }
  return img;
}

}  // namespace hideseek::planner
