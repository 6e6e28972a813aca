#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vpyr/geometry.hpp"

namespace vpyr {

// A truncated solution: convex cells with one affine map each, the domain it
// lives on (as a union of polygons) and the explicit remainder that is not
// tiled at this depth.
struct PiecewiseAffineMap {
  std::vector<ConvexCell> cells;
  std::vector<Polygon> domain;
  std::vector<Polygon> untiled;
  int depth = 0;

  bool exact() const;
};

// Maximal pieces of cell edges along which the set of adjacent cells is
// constant. `pos` lies to the left of a->b, `neg` to the right; -1 if none.
struct Interface {
  Point a;
  Point b;
  int pos = -1;
  int neg = -1;
  bool shared() const { return pos >= 0 && neg >= 0; }
};

struct Arrangement {
  std::vector<Interface> interfaces;
  // pieces where two cells sit on the same side of an edge
  std::size_t overlaps = 0;
};

// tol is relative to the largest coordinate; 0 means exact matching.
Arrangement build_arrangement(const std::vector<ConvexCell>& cells, double tol = 0.0);

struct ContinuityReport {
  Scalar max_defect;
  int worst_interface = -1;
  std::size_t shared_edges = 0;
  std::size_t frontier_edges = 0;
  std::size_t overlaps = 0;
};

// Compares the two affine maps at both ends and the midpoint of every shared
// interface.
ContinuityReport check_continuity(const std::vector<ConvexCell>& cells, const Arrangement& arr);

// Uniform grid over cell bounding boxes for point location.
class CellIndex {
 public:
  explicit CellIndex(const std::vector<ConvexCell>& cells);
  // First cell (in cell order) whose closure contains p, within tol.
  std::optional<std::size_t> locate(Vec2 p, double tol = 1e-12) const;
  // Cells whose bounding boxes meet the box.
  std::vector<std::uint32_t> query(const Box& box) const;

 private:
  const std::vector<ConvexCell>* cells_;
  std::vector<std::vector<Vec2>> polys_;
  std::vector<Box> boxes_;
  Box box_{};
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint32_t> start_, items_;
};

}  // namespace vpyr
