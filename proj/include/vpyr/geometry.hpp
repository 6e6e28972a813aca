#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpyr/scalar.hpp"

namespace vpyr {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Point {
  Scalar x;
  Scalar y;
  Vec2 v() const { return {x.value(), y.value()}; }
  bool exact() const { return x.exact() && y.exact(); }
  static Point from(Vec2 p) { return {Scalar::from_double(p.x), Scalar::from_double(p.y)}; }
};

inline Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(const Scalar& s, const Point& a) { return {s * a.x, s * a.y}; }
inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
inline Scalar dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
inline Scalar cross(const Point& a, const Point& b) { return a.x * b.y - a.y * b.x; }

// Integer 2x2 matrix, row-major. Rows index components, columns index
// partial derivatives: m(j, i) = d u^j / d x_i.
struct Mat2i {
  std::array<int, 4> e{};

  int operator()(int r, int c) const { return e[2 * r + c]; }
  int det() const { return e[0] * e[3] - e[1] * e[2]; }
  Mat2i transpose() const { return {{e[0], e[2], e[1], e[3]}}; }
  Mat2i operator-() const { return {{-e[0], -e[1], -e[2], -e[3]}}; }
  friend Mat2i operator*(const Mat2i& a, const Mat2i& b) {
    return {{a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
             a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]}};
  }
  friend Mat2i operator-(const Mat2i& a, const Mat2i& b) {
    return {{a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2], a.e[3] - b.e[3]}};
  }
  friend bool operator==(const Mat2i&, const Mat2i&) = default;

  Point apply(const Point& p) const {
    return {Scalar(e[0]) * p.x + Scalar(e[1]) * p.y, Scalar(e[2]) * p.x + Scalar(e[3]) * p.y};
  }
  Vec2 apply(Vec2 p) const { return {e[0] * p.x + e[1] * p.y, e[2] * p.x + e[3] * p.y}; }
};

inline const Mat2i kIdentity{{1, 0, 0, 1}};

enum class Label : int { PlusA1, MinusA1, PlusA2, MinusA2, PlusA3, MinusA3, PlusA4, MinusA4 };

// One of the eight matrices +-A1..+-A4.
class SignedMatrix {
 public:
  SignedMatrix() = default;
  explicit SignedMatrix(Label l) : label_(l) {}

  static std::optional<SignedMatrix> from_matrix(const Mat2i& m);
  static std::optional<SignedMatrix> from_name(const std::string& name);

  Label label() const { return label_; }
  int index() const { return static_cast<int>(label_); }
  Mat2i matrix() const;
  std::string name() const;
  SignedMatrix operator-() const;

  friend bool operator==(const SignedMatrix&, const SignedMatrix&) = default;

 private:
  Label label_ = Label::PlusA1;
};

std::array<SignedMatrix, 8> matrix_set_E();

inline SignedMatrix label_from_index(int i) { return SignedMatrix(static_cast<Label>(i)); }

using Polygon = std::vector<Point>;

struct ConvexCell {
  Polygon vertices;
  Mat2i gradient;
  Point offset;

  Point value(const Point& p) const { return gradient.apply(p) + offset; }
  Vec2 value(Vec2 p) const { return gradient.apply(p) + offset.v(); }
};

// Shoelace; exact for exact vertices.
Scalar signed_area(const Polygon& poly);
Scalar polygon_area(const ConvexCell& cell);
double polygon_area(const std::vector<Vec2>& poly);

// Keeps the part of a convex polygon where dot(normal, x - point) >= 0.
Polygon clip_halfplane(const Polygon& poly, const Point& point, const Point& normal);
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 point, Vec2 normal);
// Intersection of two convex counterclockwise polygons.
Polygon clip_convex(const Polygon& subject, const Polygon& clipper);
std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clipper);

double disk_polygon_area(Vec2 center, double radius, const std::vector<Vec2>& poly);
double disk_polygon_area(Vec2 center, double radius, const ConvexCell& cell);

bool is_convex_ccw(const Polygon& poly);
std::vector<Vec2> to_vec(const Polygon& poly);
Point centroid(const Polygon& poly);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
// Even-odd rule; points on the boundary may go either way.
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly);
// Closed test for convex counterclockwise polygons with a tolerance.
bool point_in_convex(Vec2 p, const std::vector<Vec2>& poly, double tol = 0.0);
bool point_in_convex(const Point& p, const Polygon& poly);

// Axis-aligned box.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  bool overlaps(const Box& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};
Box bounding_box(const std::vector<Vec2>& pts);

}  // namespace vpyr
