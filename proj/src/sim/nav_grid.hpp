#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sim/geometry.hpp"

namespace hideseek::sim {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(Cell, Cell) = default;
};

// Occupancy grid over the arena. A cell is occupied iff a disc of
// `inflation_mm` around its centre is not free (touches an obstacle or leaves
// the arena).
class NavGrid {
 public:
  NavGrid() = default;
  NavGrid(const Arena& arena, int resolution, double inflation_mm);

  int resolution() const { return resolution_; }
  int cell_count() const { return resolution_ * resolution_; }
  double cell_width() const { return cell_w_; }
  double cell_height() const { return cell_h_; }
  double inflation_mm() const { return inflation_mm_; }

  bool inside(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < resolution_ && c.col < resolution_; }
  int index(Cell c) const { return c.row * resolution_ + c.col; }
  Cell cell(int index) const { return {index / resolution_, index % resolution_}; }
  bool occupied(Cell c) const { return occupied_[static_cast<std::size_t>(index(c))] != 0; }
  bool free(Cell c) const { return inside(c) && !occupied(c); }

  Cell cell_of(Vec2 p) const;
  Vec2 center(Cell c) const;

  // Closest free cell by centre distance, ties by lowest index. nullopt if
  // the grid has no free cell.
  std::optional<Cell> nearest_free(Cell c) const;

 private:
  int resolution_ = 0;
  double cell_w_ = 0.0;
  double cell_h_ = 0.0;
  double inflation_mm_ = 0.0;
  std::vector<std::uint8_t> occupied_;
};

struct GridPath {
  std::vector<Cell> cells;
  int straight_moves = 0;
  int diagonal_moves = 0;

  // Cost in cell units: straight moves cost 1, diagonal moves sqrt(2).
  double cost() const;
};

// Eight neighbours of `c` that a path may step to: in bounds, free, and for
// diagonals both adjacent orthogonal cells free (no corner cutting).
// Order is fixed: E, W, S, N, SE, SW, NE, NW.
int walkable_neighbors(const NavGrid& grid, Cell c, Cell out[8], bool diagonal[8]);

// Minimal-cost 8-connected path. Ties in the open list are broken by
// (f, h, cell index). Returns nullopt (NoPath) when the goal is occupied,
// outside the grid, or unreachable.
std::optional<GridPath> astar(Cell start, Cell goal, const NavGrid& grid);

// Greedy rotate-then-translate controller following the path's cell centres.
// The first cell is skipped when the pose already lies inside it. Up to four
// cells ahead are merged into one straight leg when every skipped centre lies
// within 0.35 cells of that leg. Headings are quantized to the 10 degree
// turn step; a leg ends once the target is within half a step along-track.
// Moves are executed kinematically without collision checks.
std::vector<MotionPrimitive> path_to_primitives(const GridPath& path, const Pose& pose, const NavGrid& grid);

}  // namespace hideseek::sim
