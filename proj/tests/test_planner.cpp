#include <doctest.h>

#include <filesystem>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "models/predictors.hpp"
#include "planner/value_map.hpp"

using namespace hideseek;
using namespace hideseek::planner;
using sim::MotionPrimitive;

namespace {

// Encodes the checkpoint step in the first pixel of a 1 x 1 frame.
class StepStamp final : public models::PerspectivePredictor {
 public:
  models::Prediction predict(const models::PredictionQuery& q) override {
    models::Prediction p;
    p.grid = perception::Raster(1, 1, {static_cast<std::uint8_t>(q.t), 0, 0, 255});
    return p;
  }
};

class CaughtFrom final : public models::CatchClassifier {
 public:
  explicit CaughtFrom(int step) : step_(step) {}
  double score(const models::Prediction& v) override { return v.grid.at(0, 0)[0] >= step_ ? 1.0 : 0.0; }

 private:
  int step_;
};

ValueMap map_with(std::vector<std::optional<int>> risk, int k_max = 20) {
  ValueMap m;
  m.lattice.side = 3;
  for (int i = 0; i < 9; ++i) {
    m.lattice.goals.push_back({i, i / 3, i % 3, {300.0 * (i % 3 + 1), 300.0 * (i / 3 + 1)}, risk[static_cast<std::size_t>(i)].has_value()});
  }
  m.horizon = 200;
  m.interval = 10;
  m.k_max = k_max;
  m.risk = std::move(risk);
  return m;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("checkpoints") {
    CHECK(checkpoints(200, 10) == std::vector<int>{9, 19, 29, 39, 49, 59, 69, 79, 89, 99, 109, 119, 129, 139, 149,
                                                   159, 169, 179, 189, 199});
    CHECK(checkpoints(35, 10) == std::vector<int>{9, 19, 29});
    CHECK(checkpoints(5, 10).empty());
  }

  TEST_CASE("lattice geometry and validity") {
    const sim::Simulator sim(sim::Scenario{});
    const auto s0 = sim.initial_state(1);
    const auto lat = make_lattice(sim, s0.hider);
    REQUIRE(lat.goals.size() == 121);
    CHECK(lat.goals[0].xy == sim::Vec2{100, 100});
    CHECK(lat.goals[120].xy == sim::Vec2{1100, 1100});
    int valid = 0;
    for (const auto& g : lat.goals) {
      CHECK(g.index == g.row * 11 + g.col);
      if (g.valid) {
        ++valid;
        CHECK(sim.nav().free(sim.nav().cell_of(g.xy)));
      } else {
        CHECK_THROWS_AS(plan_to_goal(sim, s0.hider, g.xy, 200), Error);
      }
    }
    CHECK(valid > 60);
    CHECK(valid < 121);
  }

  TEST_CASE("plan to the current cell is all Stay") {
    const sim::Simulator sim(sim::Scenario{});
    const auto s0 = sim.initial_state(1);
    const auto plan = plan_to_goal(sim, s0.hider, s0.hider.position(), 50);
    CHECK(plan == std::vector<MotionPrimitive>(50, MotionPrimitive::Stay));
  }

  TEST_CASE("plan into an obstacle has no path") {
    const sim::Simulator sim(sim::Scenario{});
    const auto s0 = sim.initial_state(1);
    try {
      plan_to_goal(sim, s0.hider, {360, 400}, 200);
      FAIL("expected NoPath");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoPath);
    }
  }

  TEST_CASE("plans reach their goal cell") {
    const sim::Simulator sim(sim::Scenario{});
    const auto s0 = sim.initial_state(5);
    for (const auto& g : make_lattice(sim, s0.hider).goals) {
      if (!g.valid) continue;
      const auto plan = plan_to_goal(sim, s0.hider, g.xy, 400);
      const auto poses = hider_rollout(sim, s0.hider, plan);
      CHECK(poses.size() == plan.size() + 1);
      CHECK(sim::distance(poses.back().position(), sim.nav().center(sim.nav().cell_of(g.xy))) <= 20.0);
    }
  }

  TEST_CASE("immobilized blind seeker gives zero risk everywhere") {
    sim::Scenario sc;
    sc.obs_resolution = 64;
    sc.arena.obstacles = {{70, 70, 230, 78}, {70, 222, 230, 230}, {70, 80, 78, 220}, {222, 80, 230, 220}};
    sc.start = sim::StartPoses{{800, 800, 0}, {150, 150, 180}};
    const sim::Simulator sim(sc);
    const auto s0 = sim.initial_state(1);
    const auto truth = brute_force_value_map(sim, s0);
    models::OraclePredictor pred(sim);
    models::OracleClassifier cls(sim);
    const auto est = compute_value_map(sim, s0, pred, cls);
    CHECK(est == truth);
    for (std::size_t i = 0; i < truth.risk.size(); ++i) {
      if (!truth.lattice.goals[i].valid) continue;
      CHECK(truth.risk[i] == 0);
      CHECK(truth.safety(i) == 20);
    }
  }

  TEST_CASE("risk counts the checkpoints at or after the catch") {
    const sim::Simulator sim(sim::Scenario{});
    const auto s0 = sim.initial_state(1);
    StepStamp pred;
    CaughtFrom cls(95);
    const auto m = compute_value_map(sim, s0, pred, cls);
    for (std::size_t i = 0; i < m.risk.size(); ++i) {
      if (m.lattice.goals[i].valid) {
        CHECK(m.risk[i] == 11);
        CHECK(m.safety(i) == 9);
      } else {
        CHECK_FALSE(m.risk[i].has_value());
      }
    }
  }

  TEST_CASE("oracle pipeline equals brute force") {
    sim::Scenario sc;
    sc.obs_resolution = 64;
    const sim::Simulator sim(sc);
    for (std::uint64_t seed : {11u, 12u}) {
      const auto s0 = sim.initial_state(seed);
      models::OraclePredictor pred(sim);
      models::OracleClassifier cls(sim);
      const auto truth = brute_force_value_map(sim, s0);
      CHECK(compute_value_map(sim, s0, pred, cls) == truth);
      CHECK(ranking_accuracy(truth, truth).accuracy == 1.0);
    }
  }

  TEST_CASE("goal selection") {
    const sim::Vec2 seeker{300, 300};
    SUBCASE("highest safety wins") {
      const auto m = map_with({5, 3, 7, 9, 2, std::nullopt, 4, 8, 6});
      CHECK(select_goal(m, seeker) == 4);
    }
    SUBCASE("ties go to the goal farthest from the seeker") {
      // Goals 0 (300,300) and 8 (900,900) tie.
      const auto m = map_with({0, 5, 5, 5, 5, 5, 5, 5, 0});
      CHECK(select_goal(m, seeker) == 8);
      CHECK(select_goal(m, {900, 900}) == 0);
    }
    SUBCASE("equal distances fall back to the lowest index") {
      const auto m = map_with({3, 0, 3, 3, 3, 3, 3, 3, 3});
      CHECK(select_goal(m, {600, 300}) == 1);
      const auto m2 = map_with({0, 3, 0, 3, 3, 3, 3, 3, 3});
      CHECK(select_goal(m2, {600, 900}) == 0);
    }
    SUBCASE("no valid goal") {
      const auto m = map_with(std::vector<std::optional<int>>(9));
      CHECK_THROWS_AS(select_goal(m, seeker), Error);
    }
    SUBCASE("invariant under order-preserving transforms") {
      Rng rng(3);
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::optional<int>> r(9), r2(9);
        for (std::size_t i = 0; i < 9; ++i) {
          if (rng.bernoulli(0.8)) {
            r[i] = static_cast<int>(rng.below(6));
            r2[i] = *r[i] * 2;
          }
        }
        if (std::none_of(r.begin(), r.end(), [](const auto& v) { return v.has_value(); })) continue;
        CHECK(select_goal(map_with(r), seeker) == select_goal(map_with(r2, 40), seeker));
      }
    }
  }

  TEST_CASE("ranking accuracy") {
    const auto truth = map_with({0, 1, 2, 3, 4, 5, 6, 7, 8});
    auto reversed = truth;
    for (auto& v : reversed.risk) v = 8 - *v;
    auto flat = truth;
    for (auto& v : flat.risk) v = 4;
    const auto pairs = ranking_pairs(truth, 2.0);
    REQUIRE_FALSE(pairs.empty());
    for (const auto& p : pairs) {
      const auto& a = truth.lattice.goals[static_cast<std::size_t>(p.a)];
      const auto& b = truth.lattice.goals[static_cast<std::size_t>(p.b)];
      CHECK(std::hypot(a.row - b.row, a.col - b.col) >= 2.0);
    }
    CHECK(ranking_accuracy(truth, truth, 2.0).accuracy == 1.0);
    CHECK(ranking_accuracy(reversed, truth, 2.0).accuracy == 0.0);
    CHECK(ranking_accuracy(flat, truth, 2.0).accuracy == 0.0);
    CHECK(ranking_accuracy(truth, reversed, 2.0).pairs == ranking_accuracy(reversed, truth, 2.0).pairs);
    // With min distance 3 on a 3 x 3 lattice no pair is far enough.
    CHECK(ranking_accuracy(truth, truth, 3.0).pairs == 0);
    CHECK(ranking_accuracy(truth, truth, 3.0).accuracy == 0.0);

    auto other = truth;
    other.lattice.goals[0].xy.x += 1.0;
    CHECK_THROWS_AS(ranking_accuracy(other, truth), Error);

    const std::vector<double> s_true{1, 2, 3}, s_pred{3, 2, 1};
    const std::vector<GoalPair> explicit_pairs{{0, 2}, {1, 2}};
    const auto r = ranking_accuracy(s_pred, s_true, explicit_pairs);
    CHECK(r.pairs == 2);
    CHECK(r.correct == 0);
  }

  TEST_CASE("value map JSON round-trip and heatmap") {
    const sim::Simulator sim(sim::Scenario{});
    const auto s0 = sim.initial_state(2);
    const auto m = brute_force_value_map(sim, s0, {100, 10, 11});
    const auto sel = select_goal(m, s0.seeker.position());
    const auto path = std::filesystem::temp_directory_path() / "hideseek_vm.json";
    save_value_map(m, path, sel);
    CHECK(load_value_map(path) == m);
    const auto j = to_json(m, sel);
    CHECK(j.at("selected").get<int>() == sel);
    CHECK(value_map_from_json(j) == m);
    std::filesystem::remove(path);
    const auto img = render_heatmap(sim, m, 16);
    CHECK(img.width == 12 * 16);
    CHECK(img.height == 12 * 16);
  }
}
