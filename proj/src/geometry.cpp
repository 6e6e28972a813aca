#include "vpyr/geometry.hpp"

#include <algorithm>
#include <limits>

namespace vpyr {

namespace {

constexpr std::array<Mat2i, 4> kBase = {{
    {{1, 0, 0, 1}},
    {{0, 1, 1, 0}},
    {{-1, 0, 0, 1}},
    {{0, -1, 1, 0}},
}};

template <class P>
void drop_repeats(std::vector<P>& poly) {
  std::vector<P> out;
  out.reserve(poly.size());
  for (const auto& p : poly)
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  poly.swap(out);
}

// Signed area of the intersection of the disk of radius r at the origin with
// the triangle (0, a, b).
double disk_triangle_area(Vec2 a, Vec2 b, double r) {
  auto sector = [r](Vec2 u, Vec2 v) { return 0.5 * r * r * std::atan2(cross(u, v), dot(u, v)); };
  double r2 = r * r;
  bool ina = dot(a, a) <= r2;
  bool inb = dot(b, b) <= r2;
  if (ina && inb) return 0.5 * cross(a, b);
  Vec2 d = b - a;
  double A = dot(d, d);
  if (A == 0.0) return 0.0;
  double B = dot(a, d);
  double C = dot(a, a) - r2;
  double disc = B * B - A * C;
  if (disc <= 0.0) return sector(a, b);
  double s = std::sqrt(disc);
  double t1 = (-B - s) / A;
  double t2 = (-B + s) / A;
  if (t2 <= 0.0 || t1 >= 1.0) return sector(a, b);
  Vec2 p1 = a + std::max(t1, 0.0) * d;
  Vec2 p2 = a + std::min(t2, 1.0) * d;
  return sector(a, p1) + 0.5 * cross(p1, p2) + sector(p2, b);
}

}  // namespace

Mat2i SignedMatrix::matrix() const {
  int i = index();
  Mat2i m = kBase[i / 2];
  return i % 2 ? -m : m;
}

std::string SignedMatrix::name() const {
  int i = index();
  return std::string(i % 2 ? "-A" : "+A") + std::to_string(i / 2 + 1);
}

SignedMatrix SignedMatrix::operator-() const { return label_from_index(index() ^ 1); }

std::optional<SignedMatrix> SignedMatrix::from_matrix(const Mat2i& m) {
  for (int i = 0; i < 8; ++i)
    if (label_from_index(i).matrix() == m) return label_from_index(i);
  return std::nullopt;
}

std::optional<SignedMatrix> SignedMatrix::from_name(const std::string& name) {
  std::string n = name;
  if (!n.empty() && n[0] != '+' && n[0] != '-') n = "+" + n;
  for (int i = 0; i < 8; ++i)
    if (label_from_index(i).name() == n) return label_from_index(i);
  return std::nullopt;
}

std::array<SignedMatrix, 8> matrix_set_E() {
  std::array<SignedMatrix, 8> out;
  for (int i = 0; i < 8; ++i) out[i] = label_from_index(i);
  return out;
}

Scalar signed_area(const Polygon& poly) {
  Scalar s;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    s += cross(p, q);
  }
  return s.ldexp(-1);
}

Scalar polygon_area(const ConvexCell& cell) {
  Scalar a = signed_area(cell.vertices);
  if (a.is_zero()) throw GeometryError("zero-area cell");
  return a.abs();
}

double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

Polygon clip_halfplane(const Polygon& poly, const Point& point, const Point& normal) {
  Polygon out;
  std::size_t n = poly.size();
  if (n == 0) return out;
  std::vector<Scalar> side(n);
  for (std::size_t i = 0; i < n; ++i) side[i] = dot(normal, poly[i] - point);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    int sp = side[i].sign();
    int sq = side[(i + 1) % n].sign();
    if (sp >= 0) out.push_back(p);
    if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
      Scalar t = side[i] / (side[i] - side[(i + 1) % n]);
      out.push_back(p + t * (q - p));
    }
  }
  drop_repeats(out);
  if (out.size() < 3 || signed_area(out).is_zero()) out.clear();
  return out;
}

std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 point, Vec2 normal) {
  std::vector<Vec2> out;
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 p = poly[i];
    Vec2 q = poly[(i + 1) % n];
    double sp = dot(normal, p - point);
    double sq = dot(normal, q - point);
    if (sp >= 0) out.push_back(p);
    if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  drop_repeats(out);
  if (out.size() < 3) out.clear();
  return out;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clipper) {
  Polygon out = subject;
  for (std::size_t i = 0; i < clipper.size() && !out.empty(); ++i) {
    const Point& a = clipper[i];
    const Point& b = clipper[(i + 1) % clipper.size()];
    Point d = b - a;
    out = clip_halfplane(out, a, Point{-d.y, d.x});
  }
  return out;
}

std::vector<Vec2> clip_convex(const std::vector<Vec2>& subject, const std::vector<Vec2>& clipper) {
  std::vector<Vec2> out = subject;
  for (std::size_t i = 0; i < clipper.size() && !out.empty(); ++i) {
    Vec2 a = clipper[i];
    Vec2 d = clipper[(i + 1) % clipper.size()] - a;
    out = clip_halfplane(out, a, Vec2{-d.y, d.x});
  }
  return out;
}

double disk_polygon_area(Vec2 center, double radius, const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    s += disk_triangle_area(poly[i] - center, poly[(i + 1) % poly.size()] - center, radius);
  return std::abs(s);
}

double disk_polygon_area(Vec2 center, double radius, const ConvexCell& cell) {
  return disk_polygon_area(center, radius, to_vec(cell.vertices));
}

bool is_convex_ccw(const Polygon& poly) {
  std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    Point e1 = poly[(i + 1) % n] - poly[i];
    Point e2 = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (cross(e1, e2).sign() < 0) return false;
  }
  return signed_area(poly).sign() > 0;
}

std::vector<Vec2> to_vec(const Polygon& poly) {
  std::vector<Vec2> out;
  out.reserve(poly.size());
  for (const auto& p : poly) out.push_back(p.v());
  return out;
}

Point centroid(const Polygon& poly) {
  Scalar sx, sy;
  for (const auto& p : poly) {
    sx += p.x;
    sy += p.y;
  }
  Scalar n(static_cast<int>(poly.size()));
  return {sx / n, sy / n};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  double len2 = dot(d, d);
  double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * d));
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& poly) {
  bool inside = false;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool point_in_convex(Vec2 p, const std::vector<Vec2>& poly, double tol) {
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i];
    Vec2 d = poly[(i + 1) % n] - a;
    double len = norm(d);
    if (len == 0) continue;
    if (cross(d, p - a) / len < -tol) return false;
  }
  return true;
}

bool point_in_convex(const Point& p, const Polygon& poly) {
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    if (cross(poly[(i + 1) % n] - poly[i], p - poly[i]).sign() < 0) return false;
  return true;
}

Box bounding_box(const std::vector<Vec2>& pts) {
  Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Vec2 p : pts) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

}  // namespace vpyr
