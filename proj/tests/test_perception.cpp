#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "common/rng.hpp"
#include "oracles/generators.hpp"
#include "oracles/oracles.hpp"
#include "perception/action_embedding.hpp"
#include "perception/render.hpp"
#include "sim/world.hpp"

using namespace hideseek;
using namespace hideseek::perception;
using sim::Pose;
using sim::Vec2;
using gen::random_free_pose;

namespace {

sim::Arena open_arena() {
  sim::Arena a;
  a.obstacles.clear();
  return a;
}

const SensorModel kSensor{86.0, 60.0};

int count_class(const Raster& r, Rgba c) {
  int n = 0;
  for (int i = 0; i < r.height; ++i)
    for (int j = 0; j < r.width; ++j) n += r.at(i, j) == c;
  return n;
}


}  // namespace

TEST_SUITE("visibility") {
  TEST_CASE("empty arena: visible cells are exactly the FoV wedge") {
    const RasterGeometry g(1200, 1200, 128, 128);
    const Pose p{600, 600, 0};
    const auto vis = compute_visibility(p, open_arena(), g, kSensor);
    for (int r = 0; r < 128; ++r) {
      for (int c = 0; c < 128; ++c) {
        const Vec2 ctr = g.center({r, c});
        const double ang = std::atan2(ctr.y - 600, ctr.x - 600) * 180.0 / M_PI;
        CHECK(vis.at({r, c}) == (std::abs(ang) <= 43.0));
      }
    }
  }

  TEST_CASE("cell behind the robot is invisible") {
    const RasterGeometry g(1200, 1200, 128, 128);
    const Pose p{600, 600, 0};
    const auto vis = compute_visibility(p, open_arena(), g, kSensor);
    CHECK_FALSE(vis.at(g.pixel_of({300, 600})));
    CHECK(vis.at(g.pixel_of({900, 600})));
  }

  TEST_CASE("obstacle between robot and cell hides it") {
    sim::Arena a = open_arena();
    a.obstacles.push_back({700, 550, 750, 650});
    const RasterGeometry g(1200, 1200, 128, 128);
    const auto vis = compute_visibility({600, 600, 0}, a, g, kSensor);
    CHECK_FALSE(vis.at(g.pixel_of({1000, 600})));
    CHECK(vis.at(g.pixel_of({1000, 300})));
  }

  TEST_CASE("agreement with the ray-marching oracle") {
    const sim::Arena a = sim::Arena::default_layout();
    const RasterGeometry g(1200, 1200, 128, 128);
    Rng rng(8);
    long agree = 0;
    long total = 0;
    for (int k = 0; k < 40; ++k) {
      const Pose p = random_free_pose(rng, a);
      const auto vis = compute_visibility(p, a, g, kSensor);
      const auto ref = oracle::ray_march_visibility(p, a, g, 86.0);
      for (std::size_t i = 0; i < ref.size(); ++i) agree += (vis.visible[i] != 0) == (ref[i] != 0);
      total += static_cast<long>(ref.size());
    }
    CHECK(static_cast<double>(agree) / total >= 0.98);
  }

  TEST_CASE("omnidirectional line of sight is symmetric") {
    const sim::Arena a = sim::Arena::default_layout();
    Rng rng(13);
    for (int k = 0; k < 1000; ++k) {
      const Vec2 u{rng.uniform(0, 1200), rng.uniform(0, 1200)};
      const Vec2 v{rng.uniform(0, 1200), rng.uniform(0, 1200)};
      REQUIRE(line_of_sight(a, u, v) == line_of_sight(a, v, u));
    }
  }

  TEST_CASE("footprint is symmetric about the snapped centre") {
    const RasterGeometry g(1200, 1200, 128, 128);
    const auto fp = footprint_pixels(g, {433, 611}, 60);
    const Pixel c = g.pixel_of({433, 611});
    for (const auto& p : fp) {
      const Pixel mirror{2 * c.row - p.row, 2 * c.col - p.col};
      CHECK(std::find(fp.begin(), fp.end(), mirror) != fp.end());
    }
  }
}

TEST_SUITE("render") {
  TEST_CASE("palette colours are distinct and opaque") {
    for (std::size_t i = 0; i < kPaletteColors.size(); ++i) {
      CHECK(kPaletteColors[i][3] == 255);
      for (std::size_t j = i + 1; j < kPaletteColors.size(); ++j) CHECK(kPaletteColors[i] != kPaletteColors[j]);
      CHECK(classify(kPaletteColors[i]) == static_cast<PixelClass>(i));
    }
    CHECK_FALSE(classify({12, 34, 56, 255}).has_value());
  }

  TEST_CASE("occluded other robot is not drawn") {
    sim::Arena a = open_arena();
    a.obstacles.push_back({700, 450, 760, 750});
    const RasterGeometry g(1200, 1200, 128, 128);
    const auto obs = render_observation({600, 600, 0}, {900, 600, 180}, a, g, kSensor);
    CHECK(count_class(obs, palette::kOther) == 0);
    const auto d = decode_positions(obs, g, 60);
    CHECK_FALSE(d.other_mm.has_value());
  }

  TEST_CASE("visible other robot is a disc of the robot radius") {
    const RasterGeometry g(1200, 1200, 128, 128);
    const Pose other{900, 600, 180};
    const auto obs = render_observation({600, 600, 0}, other, open_arena(), g, kSensor);
    const auto fp = footprint_pixels(g, other.position(), 60);
    CHECK(count_class(obs, palette::kOther) == static_cast<int>(fp.size()));
    for (const auto& p : fp) CHECK(obs.at(p.row, p.col) == palette::kOther);
  }

  TEST_CASE("empty arena has no obstacle pixels") {
    const RasterGeometry g(1200, 1200, 128, 128);
    const auto obs = render_observation({600, 600, 45}, {100, 100, 0}, open_arena(), g, kSensor);
    CHECK(count_class(obs, palette::kObstacle) == 0);
    CHECK(count_class(obs, palette::kSelf) > 0);
  }

  TEST_CASE("every pixel carries exactly one palette class") {
    const sim::Arena a = sim::Arena::default_layout();
    const RasterGeometry g(1200, 1200, 64, 64);
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
      const auto obs = render_observation(random_free_pose(rng, a), random_free_pose(rng, a), a, g, kSensor);
      for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c) REQUIRE(classify(obs.at(r, c)).has_value());
    }
  }

  TEST_CASE("render then decode recovers centres within one pixel") {
    const sim::Arena a = sim::Arena::default_layout();
    for (int res : {64, 128}) {
      const RasterGeometry g(1200, 1200, res, res);
      Rng rng(static_cast<std::uint64_t>(res));
      for (int k = 0; k < 100; ++k) {
        const Pose self = random_free_pose(rng, a);
        const Pose other = random_free_pose(rng, a);
        const auto vis = compute_visibility(self, a, g, kSensor);
        const auto obs = render_observation(self, other, a, g, vis, kSensor);
        const auto d = decode_positions(obs, g, 60);
        const double tol = g.pixel_width_mm() * std::sqrt(2.0);
        CHECK(sim::distance(d.self_mm, self.position()) <= tol);
        const bool visible = robot_visible(vis, g, other.position(), 60);
        REQUIRE(d.other_mm.has_value() == visible);
        if (visible) CHECK(sim::distance(*d.other_mm, other.position()) <= tol);
      }
    }
  }

  TEST_CASE("all-blue image is malformed") {
    const RasterGeometry g(1200, 1200, 64, 64);
    const Raster blue(64, 64, palette::kInvisible);
    try {
      decode_positions(blue, g, 60);
      FAIL("expected MalformedObservation");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MalformedObservation);
    }
    Raster bad = blue;
    bad.set(3, 3, {1, 2, 3, 255});
    CHECK_THROWS_AS(decode_positions(bad, g, 60), Error);
  }

  TEST_CASE("PNG round-trip is bit-exact") {
    const RasterGeometry g(1200, 1200, 64, 64);
    const auto obs = render_observation({300, 150, 90}, {900, 900, 0}, sim::Arena::default_layout(), g, kSensor);
    CHECK(decode_png(encode_png(obs)) == obs);
    const auto path = std::filesystem::temp_directory_path() / "hideseek_png_roundtrip.png";
    write_png(obs, path);
    CHECK(read_png(path) == obs);
    std::filesystem::remove(path);
    const std::vector<std::uint8_t> junk{1, 2, 3};
    CHECK_THROWS_AS(decode_png(junk), Error);
  }
}

TEST_SUITE("action_embedding") {
  const RasterGeometry g(1200, 1200, 64, 64);

  TEST_CASE("empty trajectory is transparent") {
    const auto e = encode_actions({}, g);
    for (std::size_t i = 3; i < e.visitation.rgba.size(); i += 4) {
      CHECK(e.visitation.rgba[i] == 0);
      CHECK(e.recency.rgba[i] == 0);
    }
  }

  TEST_CASE("straight path: uniform F, increasing T") {
    std::vector<Pose> traj;
    // One pose per pixel along a row: pixel width 18.75 mm.
    for (int k = 0; k < 20; ++k) traj.push_back({100 + 18.75 * k, 600, 0});
    const auto e = encode_actions(traj, g);
    int prev = -1;
    for (const auto& p : traj) {
      const Pixel px = g.pixel_of(p.position());
      CHECK(e.visitation.at(px.row, px.col)[3] == 32);
      const int t = e.recency.at(px.row, px.col)[3];
      CHECK(t > prev);
      prev = t;
    }
    const Pixel last = g.pixel_of(traj.back().position());
    CHECK(e.recency.at(last.row, last.col)[3] == 255);
  }

  TEST_CASE("revisited cell is darker") {
    std::vector<Pose> traj{{100, 600, 0}, {200, 600, 0}, {300, 600, 0}, {200, 600, 0}, {200, 700, 0}};
    const auto e = encode_actions(traj, g);
    const Pixel twice = g.pixel_of({200, 600});
    const Pixel once = g.pixel_of({300, 600});
    CHECK(e.visitation.at(twice.row, twice.col)[3] == 64);
    CHECK(e.visitation.at(once.row, once.col)[3] == 32);
    // Last visit of the revisited cell is step 3 of horizon 4.
    CHECK(e.recency.at(twice.row, twice.col)[3] == static_cast<int>(std::lround(255.0 * 4 / 5)));
  }

  TEST_CASE("visit alpha saturates at 255") {
    std::vector<Pose> traj(20, Pose{600, 600, 0});
    const auto e = encode_actions(traj, g);
    const Pixel p = g.pixel_of({600, 600});
    CHECK(e.visitation.at(p.row, p.col)[3] == 255);
  }

  TEST_CASE("reversal changes T but not F") {
    std::vector<Pose> traj;
    for (int k = 0; k < 15; ++k) traj.push_back({200 + 30.0 * k, 300 + 10.0 * k, 0});
    auto rev = traj;
    std::reverse(rev.begin(), rev.end());
    const auto a = encode_actions(traj, g);
    const auto b = encode_actions(rev, g);
    CHECK(a.visitation == b.visitation);
    CHECK_FALSE(a.recency == b.recency);
  }
}
