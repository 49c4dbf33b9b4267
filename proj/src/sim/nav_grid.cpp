#include "sim/nav_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "common/error.hpp"

namespace hideseek::sim {

NavGrid::NavGrid(const Arena& arena, int resolution, double inflation_mm)
    : resolution_(resolution), inflation_mm_(inflation_mm) {
  if (resolution <= 0) fail(Errc::InvalidArgument, "nav grid resolution must be positive");
  cell_w_ = arena.width_mm / resolution;
  cell_h_ = arena.height_mm / resolution;
  occupied_.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      occupied_[static_cast<std::size_t>(r * resolution + c)] =
          disc_free(arena, center({r, c}), inflation_mm) ? 0 : 1;
    }
  }
}

Cell NavGrid::cell_of(Vec2 p) const {
  const int col = std::clamp(static_cast<int>(std::floor(p.x / cell_w_)), 0, resolution_ - 1);
  const int row = std::clamp(static_cast<int>(std::floor(p.y / cell_h_)), 0, resolution_ - 1);
  return {row, col};
}

Vec2 NavGrid::center(Cell c) const { return {(c.col + 0.5) * cell_w_, (c.row + 0.5) * cell_h_}; }

std::optional<Cell> NavGrid::nearest_free(Cell c) const {
  if (free(c)) return c;
  std::optional<Cell> best;
  long best_d2 = std::numeric_limits<long>::max();
  for (int i = 0; i < cell_count(); ++i) {
    if (occupied_[static_cast<std::size_t>(i)]) continue;
    const Cell q = cell(i);
    const long dr = q.row - c.row;
    const long dc = q.col - c.col;
    const long d2 = dr * dr + dc * dc;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = q;
    }
  }
  return best;
}

double GridPath::cost() const { return straight_moves + diagonal_moves * std::numbers::sqrt2; }

int walkable_neighbors(const NavGrid& grid, Cell c, Cell out[8], bool diagonal[8]) {
  static constexpr int kDr[8] = {0, 0, 1, -1, 1, 1, -1, -1};
  static constexpr int kDc[8] = {1, -1, 0, 0, 1, -1, 1, -1};
  int n = 0;
  for (int k = 0; k < 8; ++k) {
    const Cell q{c.row + kDr[k], c.col + kDc[k]};
    if (!grid.free(q)) continue;
    const bool diag = k >= 4;
    if (diag && (!grid.free({c.row + kDr[k], c.col}) || !grid.free({c.row, c.col + kDc[k]}))) continue;
    out[n] = q;
    diagonal[n] = diag;
    ++n;
  }
  return n;
}

namespace {

double octile(Cell a, Cell b) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  return (std::numbers::sqrt2 - 1.0) * std::min(dr, dc) + std::max(dr, dc);
}

}  // namespace

std::optional<GridPath> astar(Cell start, Cell goal, const NavGrid& grid) {
  if (!grid.free(goal) || !grid.free(start)) return std::nullopt;
  const int n = grid.cell_count();
  const int goal_idx = grid.index(goal);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(n), inf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<std::uint8_t> closed(static_cast<std::size_t>(n), 0);

  using Entry = std::tuple<double, double, int>;  // f, h, index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int start_idx = grid.index(start);
  g[static_cast<std::size_t>(start_idx)] = 0.0;
  open.emplace(octile(start, goal), octile(start, goal), start_idx);

  Cell nb[8];
  bool diag[8];
  while (!open.empty()) {
    const auto [f, h, idx] = open.top();
    open.pop();
    if (closed[static_cast<std::size_t>(idx)]) continue;
    closed[static_cast<std::size_t>(idx)] = 1;
    if (idx == goal_idx) break;
    const Cell c = grid.cell(idx);
    const int count = walkable_neighbors(grid, c, nb, diag);
    for (int k = 0; k < count; ++k) {
      const int j = grid.index(nb[k]);
      if (closed[static_cast<std::size_t>(j)]) continue;
      const double cand = g[static_cast<std::size_t>(idx)] + (diag[k] ? std::numbers::sqrt2 : 1.0);
      if (cand < g[static_cast<std::size_t>(j)]) {
        g[static_cast<std::size_t>(j)] = cand;
        parent[static_cast<std::size_t>(j)] = idx;
        const double hj = octile(nb[k], goal);
        open.emplace(cand + hj, hj, j);
      }
    }
  }
  if (!closed[static_cast<std::size_t>(goal_idx)]) return std::nullopt;

  GridPath path;
  for (int idx = goal_idx; idx != -1; idx = parent[static_cast<std::size_t>(idx)]) {
    path.cells.push_back(grid.cell(idx));
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const Cell a = path.cells[i - 1];
    const Cell b = path.cells[i];
    if (a.row != b.row && a.col != b.col) {
      ++path.diagonal_moves;
    } else {
      ++path.straight_moves;
    }
  }
  return path;
}

namespace {

// Farthest index j in (i, i + kLookahead] such that every intermediate cell
// centre stays within a fraction of a cell of the straight segment pos -> j.
std::size_t lookahead_target(const GridPath& path, std::size_t i, Vec2 pos, const NavGrid& grid) {
  constexpr std::size_t kLookahead = 4;
  const double tol = 0.35 * std::min(grid.cell_width(), grid.cell_height());
  std::size_t best = i;
  for (std::size_t j = i + 1; j < path.cells.size() && j <= i + kLookahead; ++j) {
    const Vec2 end = grid.center(path.cells[j]);
    const Vec2 seg = end - pos;
    const double len = norm(seg);
    bool ok = true;
    for (std::size_t k = i; k < j && ok; ++k) {
      const Vec2 q = grid.center(path.cells[k]) - pos;
      const double cross = len > 0.0 ? std::abs(seg.x * q.y - seg.y * q.x) / len : norm(q);
      ok = cross <= tol;
    }
    if (!ok) break;
    best = j;
  }
  return best;
}

}  // namespace

std::vector<MotionPrimitive> path_to_primitives(const GridPath& path, const Pose& pose, const NavGrid& grid) {
  constexpr double kReachedMm = kStepMm / 2.0;
  std::vector<MotionPrimitive> out;
  if (path.cells.empty()) return out;

  Vec2 pos = pose.position();
  double heading = pose.heading_deg;
  std::size_t i = grid.cell_of(pos) == path.cells.front() ? 1 : 0;

  while (i < path.cells.size()) {
    // The first waypoint is always path[i]; later ones may be skipped when
    // the straight segment passes close to them.
    const std::size_t j = i == 0 ? 0 : lookahead_target(path, i, pos, grid);
    const Vec2 target = grid.center(path.cells[j]);
    i = j + 1;
    Vec2 d = target - pos;
    if (norm(d) <= kReachedMm) continue;

    const double bearing = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
    const double desired = normalize_deg(std::round(bearing / kTurnDeg) * kTurnDeg);
    double err = angle_diff_deg(desired, heading);
    while (std::abs(err) > kTurnDeg / 2.0) {
      // An exact half-turn rotates left.
      if (err > 0.0) {
        out.push_back(MotionPrimitive::RotateLeft);
        heading = normalize_deg(heading + kTurnDeg);
      } else {
        out.push_back(MotionPrimitive::RotateRight);
        heading = normalize_deg(heading - kTurnDeg);
      }
      err = angle_diff_deg(desired, heading);
    }

    const double rad = heading * std::numbers::pi / 180.0;
    const Vec2 u{std::cos(rad), std::sin(rad)};
    while (dot(d, u) > kReachedMm) {
      out.push_back(MotionPrimitive::Forward);
      pos = pos + kStepMm * u;
      d = target - pos;
    }
  }
  return out;
}

}  // namespace hideseek::sim
