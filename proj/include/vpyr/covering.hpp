#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpyr/geometry.hpp"
#include "vpyr/segment_set.hpp"

namespace vpyr {

// Strictly decreasing C1 profile h on an interval: either linear
// h(t) = c0 + c1 t, or a cubic Hermite spline through (knot, value, slope).
class MonotoneProfile {
 public:
  struct Knot {
    double t, value, slope;
  };

  static MonotoneProfile linear(Scalar c0, Scalar c1);
  // Throws std::invalid_argument unless knots increase and h' < 0 throughout.
  static MonotoneProfile spline(std::vector<Knot> knots);

  bool is_linear() const { return linear_; }
  Scalar c0() const { return c0_; }
  Scalar c1() const { return c1_; }
  const std::vector<Knot>& knots() const { return knots_; }

  double operator()(double t) const;
  double derivative(double t) const;
  // Exact for a linear profile with dyadic coefficients and argument.
  Scalar eval(const Scalar& t) const;
  // min and max of h' over [a, b]
  std::pair<double, double> slope_range(double a, double b) const;
  // integral of h over [a, b]
  double integral(double a, double b) const;
  // domain of definition
  double lo() const;
  double hi() const;

 private:
  bool linear_ = true;
  Scalar c0_, c1_;
  std::vector<Knot> knots_;
  std::size_t piece(double t) const;
};

// T_h = {a <= s <= b, h(b) <= t <= h(s)}
struct TriangularDomain {
  Scalar a, b;
  MonotoneProfile h;

  Scalar hb() const { return h.eval(b); }
  Scalar ha() const { return h.eval(a); }
  double c1() const { return -h.slope_range(a.value(), b.value()).first; }
  double c2() const { return -h.slope_range(a.value(), b.value()).second; }
  double area() const;
  bool contains(Vec2 p, double tol = 0.0) const;
  // Vertical strips under the chords of h, each a convex quadrilateral,
  // counterclockwise. Exact for a linear profile (one strip).
  std::vector<Polygon> strips(int n = 64) const;
};

// Throws std::invalid_argument on a < b violations or a non-decreasing h.
TriangularDomain make_triangle(Scalar a, Scalar b, MonotoneProfile h);

struct Provenance {
  enum Kind { Rectangle, Triangle, Vitali };
  Kind kind = Rectangle;
  int piece = 0;     // index of the rectangle or triangle in the domain
  int step = 0;      // greedy step, word length, or Vitali level
  std::string word;  // triangle word over {u, r}

  std::string str() const;
  static std::optional<Provenance> parse(const std::string& s);
};

struct PlacedSquare {
  Point center;
  Scalar side;
  int rotation = 0;  // quarter turns
  Provenance tag;

  Polygon polygon() const;
  Scalar x0() const { return center.x - Scalar::pow2(-1) * side; }
  Scalar y0() const { return center.y - Scalar::pow2(-1) * side; }
};

struct TriangleSplit {
  PlacedSquare q;
  TriangularDomain u, r;
  Scalar x0;
};

// Throws std::invalid_argument("malformed triangle") when the root is not
// bracketed.
TriangleSplit triangle_split(const TriangularDomain& T);

struct AlphaCheck {
  bool compatible = false;
  double r_b = 0.0, r_h = 0.0;
  // 2 max{r_B, r_H}^(alpha+1)
  double ratio = 0.0;
};
AlphaCheck alpha_compatible(const TriangularDomain& T, double alpha);
// The alpha above which the strict inequality holds.
double alpha_threshold(const TriangularDomain& T);

// Per piece bookkeeping the tail bounds need.
struct PieceInfo {
  Provenance::Kind kind = Provenance::Rectangle;
  int index = 0;
  // rectangles: side sum the greedy covering has not placed (0 when finite)
  double residual_sides = 0.0;
  double residual_area = 0.0;
  // triangles: word length generated, and max{h(a) - h(b), b - a}
  int m_max = 0;
  double extent = 0.0;
  // triangles: max{r_B, r_H} and sample points on the graph of h
  double r_max = 0.0;
  std::vector<Vec2> graph;
};

struct Covering {
  std::vector<PlacedSquare> squares;
  // union of these convex counterclockwise polygons is the domain
  std::vector<Polygon> parts;
  std::vector<PieceInfo> pieces;
  bool truncated = false;
  double residual_area = 0.0;

  double side_sum() const;
  double domain_area() const;
};

// Greedy Euclid covering of [x0, x0 + a] x [y0, y0 + b] (either side may be
// the longer one). Stops after max_squares and flags the residual.
Covering rectangle_covering(const Scalar& a, const Scalar& b, int max_squares);
Covering rectangle_covering(const Point& corner, const Scalar& w, const Scalar& h, int max_squares, int piece = 0);

Covering triangle_covering(const TriangularDomain& T, int m_max, int piece = 0);

// Dyadic squares of side 2^-(n+1) selected at level n for n = 0..n_max.
// `polygon` is a simple counterclockwise or clockwise polygon.
Covering vitali_dyadic_covering(const std::vector<Vec2>& polygon, int n_max);

// Rotation by quarter turns and translation of the triangle's local frame.
struct PlacedTriangle {
  TriangularDomain T;
  int rotation = 0;
  Point translation;

  Point to_global(const Point& p) const;
  Vec2 to_global(Vec2 p) const;
};

struct CompatibleDomain {
  std::vector<std::array<Scalar, 4>> rectangles;  // x0 y0 x1 y1
  std::vector<PlacedTriangle> triangles;
  double alpha = 1.0;
  std::optional<std::vector<Vec2>> polygon;  // Vitali domain

  // convex parts in global coordinates
  std::vector<Polygon> parts() const;
};

struct CompatibilityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OverlapError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Validates pairwise interior disjointness and alpha-compatibility.
CompatibleDomain assemble_compatible(CompatibleDomain spec);

struct CoverOptions {
  int max_rect_squares = 64;
  int m_max = 6;
  int n_max = 5;
};
// Covers every piece (or the Vitali polygon) and records per-piece info.
Covering cover_domain(const CompatibleDomain& dom, const CoverOptions& opt);

// Boundary of the union of convex parts: edges not shared by two parts.
SegmentSet domain_boundary(const std::vector<Polygon>& parts);

// JSON domain description, see README. Throws SpecError on bad input.
struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
CompatibleDomain parse_domain_spec(const std::string& text);
CompatibleDomain load_domain_spec(const std::string& path);

std::string write_covering(const Covering& cov);
Covering read_covering(const std::string& text);

}  // namespace vpyr
