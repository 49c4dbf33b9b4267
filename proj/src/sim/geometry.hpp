#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hideseek::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

double dot(Vec2 a, Vec2 b);
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

// Axis-aligned rectangle, [x0, x1] x [y0, y1] in millimetres.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double distance_to(Vec2 p) const;
  bool overlaps(const Rect& o) const;
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Arena {
  double width_mm = 1200.0;
  double height_mm = 1200.0;
  std::vector<Rect> obstacles;

  // Three-block layout used unless a scenario overrides it.
  static Arena default_layout();

  // Throws Error(InvalidScenario) when obstacles leave the bounds or overlap.
  void validate() const;

  friend bool operator==(const Arena&, const Arena&) = default;
};

// True when a disc of `radius` centred at `c` stays inside the arena and does
// not touch the interior of any obstacle.
bool disc_free(const Arena& arena, Vec2 c, double radius);

// True when the closed segment a-b meets any obstacle rectangle.
bool segment_blocked(const Arena& arena, Vec2 a, Vec2 b);

struct Pose {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double heading_deg = 0.0;  // counter-clockwise from +x, in [0, 360)

  Vec2 position() const { return {x_mm, y_mm}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

double normalize_deg(double deg);
// Signed smallest difference a - b in (-180, 180].
double angle_diff_deg(double a, double b);

enum class MotionPrimitive { Stay = 0, Forward = 1, Backward = 2, RotateLeft = 3, RotateRight = 4 };

inline constexpr double kStepMm = 10.0;
inline constexpr double kTurnDeg = 10.0;

std::string_view to_string(MotionPrimitive p);
// Accepts the enum names and the short forms F, B, L, R, S.
MotionPrimitive parse_primitive(std::string_view text);

// Blocked translations leave the pose unchanged; rotations always succeed.
Pose apply_primitive(const Pose& pose, MotionPrimitive p, const Arena& arena, double robot_radius_mm);

}  // namespace hideseek::sim
