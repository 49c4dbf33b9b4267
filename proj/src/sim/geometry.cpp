#include "sim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace hideseek::sim {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

double Rect::distance_to(Vec2 p) const {
  const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::hypot(dx, dy);
}

bool Rect::overlaps(const Rect& o) const {
  return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
}

Arena Arena::default_layout() {
  Arena a;
  a.obstacles = {
      Rect{300.0, 250.0, 420.0, 560.0},
      Rect{680.0, 300.0, 980.0, 400.0},
      Rect{560.0, 740.0, 700.0, 960.0},
  };
  return a;
}

void Arena::validate() const {
  if (!(width_mm > 0.0) || !(height_mm > 0.0)) {
    fail(Errc::InvalidScenario, "arena dimensions must be positive");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Rect& r = obstacles[i];
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1)) {
      fail(Errc::InvalidScenario, "obstacle " + std::to_string(i) + " is empty");
    }
    if (!(r.x0 > 0.0 && r.y0 > 0.0 && r.x1 < width_mm && r.y1 < height_mm)) {
      fail(Errc::InvalidScenario, "obstacle " + std::to_string(i) + " is not strictly inside the arena");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (r.overlaps(obstacles[j])) {
        fail(Errc::InvalidScenario,
             "obstacles " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      }
    }
  }
}

bool disc_free(const Arena& arena, Vec2 c, double radius) {
  if (c.x - radius < 0.0 || c.y - radius < 0.0 || c.x + radius > arena.width_mm ||
      c.y + radius > arena.height_mm) {
    return false;
  }
  return std::none_of(arena.obstacles.begin(), arena.obstacles.end(),
                      [&](const Rect& r) { return r.distance_to(c) < radius; });
}

namespace {

// Liang-Barsky clip of a + t(b - a), t in [0, 1], against a closed rectangle.
bool segment_meets_rect(Vec2 a, Vec2 b, const Rect& r) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.x0, r.x1 - a.x, a.y - r.y0, r.y1 - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

bool segment_blocked(const Arena& arena, Vec2 a, Vec2 b) {
  return std::any_of(arena.obstacles.begin(), arena.obstacles.end(),
                     [&](const Rect& r) { return segment_meets_rect(a, b, r); });
}

double normalize_deg(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

double angle_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

std::string_view to_string(MotionPrimitive p) {
  switch (p) {
    case MotionPrimitive::Stay: return "Stay";
    case MotionPrimitive::Forward: return "Forward";
    case MotionPrimitive::Backward: return "Backward";
    case MotionPrimitive::RotateLeft: return "RotateLeft";
    case MotionPrimitive::RotateRight: return "RotateRight";
  }
  return "Stay";
}

MotionPrimitive parse_primitive(std::string_view text) {
  if (text == "Stay" || text == "S") return MotionPrimitive::Stay;
  if (text == "Forward" || text == "F") return MotionPrimitive::Forward;
  if (text == "Backward" || text == "B") return MotionPrimitive::Backward;
  if (text == "RotateLeft" || text == "L") return MotionPrimitive::RotateLeft;
  if (text == "RotateRight" || text == "R") return MotionPrimitive::RotateRight;
  fail(Errc::InvalidArgument, "unknown motion primitive '" + std::string(text) + "'");
}

Pose apply_primitive(const Pose& pose, MotionPrimitive p, const Arena& arena, double robot_radius_mm) {
  Pose next = pose;
  switch (p) {
    case MotionPrimitive::Stay:
      return next;
    case MotionPrimitive::RotateLeft:
      next.heading_deg = normalize_deg(pose.heading_deg + kTurnDeg);
      return next;
    case MotionPrimitive::RotateRight:
      next.heading_deg = normalize_deg(pose.heading_deg - kTurnDeg);
      return next;
    case MotionPrimitive::Forward:
    case MotionPrimitive::Backward: {
      const double sign = p == MotionPrimitive::Forward ? 1.0 : -1.0;
      const double rad = pose.heading_deg * std::numbers::pi / 180.0;
      next.x_mm = pose.x_mm + sign * kStepMm * std::cos(rad);
      next.y_mm = pose.y_mm + sign * kStepMm * std::sin(rad);
      if (!disc_free(arena, next.position(), robot_radius_mm)) return pose;
      return next;
    }
  }
  return next;
}

}  // namespace hideseek::sim
