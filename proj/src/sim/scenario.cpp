#include "sim/scenario.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "common/error.hpp"

namespace hideseek::sim {

void Scenario::validate() const {
  arena.validate();
  if (!(robot_radius_mm > 0.0)) fail(Errc::InvalidScenario, "robot_radius_mm must be positive");
  if (!(catch_radius_mm > 0.0)) fail(Errc::InvalidScenario, "catch_radius_mm must be positive");
  if (!(fov_deg > 0.0 && fov_deg <= 360.0)) fail(Errc::InvalidScenario, "fov_deg must be in (0, 360]");
  if (max_steps < 0) fail(Errc::InvalidScenario, "max_steps must be non-negative");
  if (nav_resolution < 2 || obs_resolution < 2) fail(Errc::InvalidScenario, "grid resolutions must be at least 2");
  if (planning_clearance_mm < 0.0) fail(Errc::InvalidScenario, "planning_clearance_mm must be non-negative");
  if (start) {
    for (const Pose* p : {&start->hider, &start->seeker}) {
      if (!disc_free(arena, p->position(), robot_radius_mm)) {
        fail(Errc::InvalidScenario, "start pose collides with the arena or an obstacle");
      }
      if (!(p->heading_deg >= 0.0 && p->heading_deg < 360.0)) {
        fail(Errc::InvalidScenario, "start heading must be in [0, 360)");
      }
    }
  }
}

nlohmann::json pose_to_json(const Pose& p) { return nlohmann::json::array({p.x_mm, p.y_mm, p.heading_deg}); }

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) fail(Errc::InvalidScenario, "pose must be [x_mm, y_mm, heading_deg]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const Rect& r : s.arena.obstacles) obstacles.push_back({r.x0, r.y0, r.x1, r.y1});
  nlohmann::json j = {
      {"arena", {{"width_mm", s.arena.width_mm}, {"height_mm", s.arena.height_mm}, {"obstacles", obstacles}}},
      {"robot_radius_mm", s.robot_radius_mm},
      {"catch_radius_mm", s.catch_radius_mm},
      {"fov_deg", s.fov_deg},
      {"seed", s.seed},
      {"max_steps", s.max_steps},
      {"nav_resolution", s.nav_resolution},
      {"obs_resolution", s.obs_resolution},
      {"planning_clearance_mm", s.planning_clearance_mm},
      {"min_start_separation_mm", s.min_start_separation_mm},
  };
  if (s.start) {
    j["start"] = {{"hider", pose_to_json(s.start->hider)}, {"seeker", pose_to_json(s.start->seeker)}};
  } else {
    j["start"] = "random";
  }
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario s;
    if (j.contains("arena")) {
      const auto& a = j.at("arena");
      s.arena.width_mm = a.value("width_mm", 1200.0);
      s.arena.height_mm = a.value("height_mm", 1200.0);
      if (a.contains("obstacles")) {
        s.arena.obstacles.clear();
        for (const auto& r : a.at("obstacles")) {
          if (!r.is_array() || r.size() != 4) fail(Errc::InvalidScenario, "obstacle must be [x0, y0, x1, y1]");
          s.arena.obstacles.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()});
        }
      }
    }
    s.robot_radius_mm = j.value("robot_radius_mm", s.robot_radius_mm);
    s.catch_radius_mm = j.value("catch_radius_mm", s.catch_radius_mm);
    s.fov_deg = j.value("fov_deg", s.fov_deg);
    s.seed = j.value("seed", s.seed);
    s.max_steps = j.value("max_steps", s.max_steps);
    s.nav_resolution = j.value("nav_resolution", s.nav_resolution);
    s.obs_resolution = j.value("obs_resolution", s.obs_resolution);
    s.planning_clearance_mm = j.value("planning_clearance_mm", s.planning_clearance_mm);
    s.min_start_separation_mm = j.value("min_start_separation_mm", s.min_start_separation_mm);
    if (j.contains("start")) {
      const auto& st = j.at("start");
      if (st.is_string()) {
        if (st.get<std::string>() != "random") fail(Errc::InvalidScenario, "start must be \"random\" or an object");
      } else {
        s.start = StartPoses{pose_from_json(st.at("hider")), pose_from_json(st.at("seeker"))};
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidScenario, std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::Io, "cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidScenario, "scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) fail(Errc::Io, "cannot write scenario " + path.string());
  f << to_json(s).dump(2) << '\n';
}

std::string scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr)) {
    fail(Errc::Internal, "sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

}  // namespace hideseek::sim
