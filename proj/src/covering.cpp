#include "vpyr/covering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vpyr/piecewise_map.hpp"

namespace vpyr {

using json = nlohmann::json;

// ---------------------------------------------------------------- profile

MonotoneProfile MonotoneProfile::linear(Scalar c0, Scalar c1) {
  if (!(c1 < Scalar(0))) throw std::invalid_argument("profile must be strictly decreasing");
  MonotoneProfile p;
  p.linear_ = true;
  p.c0_ = c0;
  p.c1_ = c1;
  return p;
}

namespace {

// h' on a Hermite piece as a quadratic in s in [0,1]: q0 + q1 s + q2 s^2
std::array<double, 3> hermite_slope(const MonotoneProfile::Knot& k0, const MonotoneProfile::Knot& k1) {
  double d = k1.t - k0.t, dv = (k1.value - k0.value) / d;
  // h'(s) = m0 (1 - 4s + 3s^2) + m1 (3s^2 - 2s) + dv (6s - 6s^2)
  return {k0.slope, -4 * k0.slope - 2 * k1.slope + 6 * dv, 3 * k0.slope + 3 * k1.slope - 6 * dv};
}

std::pair<double, double> quad_range(const std::array<double, 3>& q, double s0, double s1) {
  auto f = [&](double s) { return q[0] + q[1] * s + q[2] * s * s; };
  double lo = std::min(f(s0), f(s1)), hi = std::max(f(s0), f(s1));
  if (q[2] != 0) {
    double v = -q[1] / (2 * q[2]);
    if (v > s0 && v < s1) lo = std::min(lo, f(v)), hi = std::max(hi, f(v));
  }
  return {lo, hi};
}

}  // namespace

MonotoneProfile MonotoneProfile::spline(std::vector<Knot> knots) {
  if (knots.size() < 2) throw std::invalid_argument("spline needs at least two knots");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!(knots[i + 1].t > knots[i].t)) throw std::invalid_argument("spline knots must increase");
    auto [lo, hi] = quad_range(hermite_slope(knots[i], knots[i + 1]), 0.0, 1.0);
    (void)lo;
    if (!(hi < 0)) throw std::invalid_argument("profile must be strictly decreasing");
  }
  MonotoneProfile p;
  p.linear_ = false;
  p.knots_ = std::move(knots);
  return p;
}

double MonotoneProfile::lo() const { return linear_ ? -INFINITY : knots_.front().t; }
double MonotoneProfile::hi() const { return linear_ ? INFINITY : knots_.back().t; }

std::size_t MonotoneProfile::piece(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t, [](double v, const Knot& k) { return v < k.t; });
  std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(i, knots_.size() - 2);
}

double MonotoneProfile::operator()(double t) const {
  if (linear_) return c0_.value() + c1_.value() * t;
  const Knot &k0 = knots_[piece(t)], &k1 = knots_[piece(t) + 1];
  double d = k1.t - k0.t, s = (t - k0.t) / d;
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * k0.value + (s3 - 2 * s2 + s) * d * k0.slope + (-2 * s3 + 3 * s2) * k1.value +
         (s3 - s2) * d * k1.slope;
}

double MonotoneProfile::derivative(double t) const {
  if (linear_) return c1_.value();
  std::size_t i = piece(t);
  auto q = hermite_slope(knots_[i], knots_[i + 1]);
  double s = (t - knots_[i].t) / (knots_[i + 1].t - knots_[i].t);
  return q[0] + q[1] * s + q[2] * s * s;
}

Scalar MonotoneProfile::eval(const Scalar& t) const {
  if (linear_) return c0_ + c1_ * t;
  return Scalar::from_double((*this)(t.value()));
}

std::pair<double, double> MonotoneProfile::slope_range(double a, double b) const {
  if (linear_) return {c1_.value(), c1_.value()};
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    double t0 = std::max(a, knots_[i].t), t1 = std::min(b, knots_[i + 1].t);
    if (t0 > t1) continue;
    double d = knots_[i + 1].t - knots_[i].t;
    auto [l, h] = quad_range(hermite_slope(knots_[i], knots_[i + 1]), (t0 - knots_[i].t) / d, (t1 - knots_[i].t) / d);
    lo = std::min(lo, l);
    hi = std::max(hi, h);
  }
  return {lo, hi};
}

double MonotoneProfile::integral(double a, double b) const {
  if (linear_) return c0_.value() * (b - a) + 0.5 * c1_.value() * (b * b - a * a);
  // Simpson is exact on cubics
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    double t0 = std::max(a, knots_[i].t), t1 = std::min(b, knots_[i + 1].t);
    if (t0 >= t1) continue;
    total += (t1 - t0) / 6 * ((*this)(t0) + 4 * (*this)(0.5 * (t0 + t1)) + (*this)(t1));
  }
  return total;
}

// ---------------------------------------------------------------- triangles

TriangularDomain make_triangle(Scalar a, Scalar b, MonotoneProfile h) {
  if (!(a < b)) throw std::invalid_argument("triangle needs a < b");
  if (a.value() < h.lo() || b.value() > h.hi()) throw std::invalid_argument("profile not defined on [a, b]");
  return {a, b, std::move(h)};
}

double TriangularDomain::area() const {
  return h.integral(a.value(), b.value()) - (b - a).value() * hb().value();
}

bool TriangularDomain::contains(Vec2 p, double tol) const {
  return p.x >= a.value() - tol && p.x <= b.value() + tol && p.y >= hb().value() - tol && p.y <= h(p.x) + tol;
}

std::vector<Polygon> TriangularDomain::strips(int n) const {
  Scalar base = hb();
  if (h.is_linear()) return {{{a, base}, {b, base}, {a, ha()}}};
  std::vector<Polygon> out;
  double A = a.value(), B = b.value();
  for (int i = 0; i < n; ++i) {
    Scalar s0 = i == 0 ? a : Scalar::from_double(A + (B - A) * i / n);
    Scalar s1 = i + 1 == n ? b : Scalar::from_double(A + (B - A) * (i + 1) / n);
    Polygon p{{s0, base}, {s1, base}};
    if (i + 1 < n) p.push_back({s1, h.eval(s1)});
    p.push_back({s0, h.eval(s0)});
    out.push_back(std::move(p));
  }
  return out;
}

std::string Provenance::str() const {
  switch (kind) {
    case Rectangle: return "rect:" + std::to_string(piece) + ":" + std::to_string(step);
    case Triangle: return "tri:" + std::to_string(piece) + ":" + (word.empty() ? "-" : word);
    case Vitali: return "vitali:" + std::to_string(step);
  }
  return {};
}

std::optional<Provenance> Provenance::parse(const std::string& s) {
  std::vector<std::string> f;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ':');) f.push_back(part);
  Provenance p;
  try {
    if (f.size() == 3 && f[0] == "rect") {
      p.kind = Rectangle, p.piece = std::stoi(f[1]), p.step = std::stoi(f[2]);
    } else if (f.size() == 3 && f[0] == "tri") {
      p.kind = Triangle, p.piece = std::stoi(f[1]), p.word = f[2] == "-" ? "" : f[2];
      if (p.word.find_first_not_of("ur") != std::string::npos) return std::nullopt;
      p.step = static_cast<int>(p.word.size());
    } else if (f.size() == 2 && f[0] == "vitali") {
      p.kind = Vitali, p.step = std::stoi(f[1]);
    } else {
      return std::nullopt;
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return p;
}

Polygon PlacedSquare::polygon() const {
  Scalar h = Scalar::pow2(-1) * side;
  Scalar x0 = center.x - h, x1 = center.x + h, y0 = center.y - h, y1 = center.y + h;
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

TriangleSplit triangle_split(const TriangularDomain& T) {
  Scalar base = T.hb();
  // g(x) = h(x) - x - h(b) + a, decreasing, g(a) > 0 > g(b)
  auto g = [&](const Scalar& x) { return T.h.eval(x) - x - base + T.a; };
  Scalar lo = T.a, hi = T.b;
  if (!(g(lo) > Scalar(0)) || !(g(hi) < Scalar(0))) throw std::invalid_argument("malformed triangle");
  double width_tol = 1e-12 * std::max(1.0, std::abs(T.b.value()) + std::abs(T.a.value()));
  Scalar x0 = lo;
  bool found = false;
  for (int it = 0; it < 200 && (hi - lo).value() > width_tol; ++it) {
    Scalar mid = Scalar::pow2(-1) * (lo + hi);
    Scalar gm = g(mid);
    if (gm.is_zero()) {
      x0 = mid;
      found = true;
      break;
    }
    if (gm > Scalar(0)) lo = mid;
    else hi = mid;
  }
  // keep the left end of the bracket so the square stays under the graph
  if (!found) x0 = lo;
  Scalar side = x0 - T.a;
  TriangleSplit out;
  out.x0 = x0;
  out.q.side = side;
  out.q.center = {T.a + Scalar::pow2(-1) * side, base + Scalar::pow2(-1) * side};
  out.u = {T.a, x0, T.h};
  out.r = {x0, T.b, T.h};
  return out;
}

AlphaCheck alpha_compatible(const TriangularDomain& T, double alpha) {
  AlphaCheck c;
  double c1 = T.c1(), c2 = T.c2();
  c.r_b = 1.0 / (1.0 + 1.0 / c1);
  c.r_h = 1.0 / (1.0 + c2);
  c.ratio = 2.0 * std::pow(std::max(c.r_b, c.r_h), alpha + 1.0);
  c.compatible = c.ratio < 1.0;
  return c;
}

double alpha_threshold(const TriangularDomain& T) {
  auto c = alpha_compatible(T, 1.0);
  return std::log(2.0) / -std::log(std::max(c.r_b, c.r_h)) - 1.0;
}

double Covering::side_sum() const {
  double s = 0.0;
  for (const auto& q : squares) s += q.side.value();
  return s;
}

double Covering::domain_area() const {
  double s = 0.0;
  for (const auto& p : parts) s += signed_area(p).value();
  return s;
}

// ---------------------------------------------------------------- rectangles

Covering rectangle_covering(const Point& corner, const Scalar& w0, const Scalar& h0, int max_squares, int piece) {
  if (!(w0 > Scalar(0)) || !(h0 > Scalar(0))) throw std::invalid_argument("rectangle sides must be positive");
  Covering cov;
  Scalar x = corner.x, y = corner.y, w = w0, h = h0;
  cov.parts.push_back({{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}});
  // sides below this are rounding noise of inexact input
  double noise = 1e-14 * std::max(w0.value(), h0.value());
  int step = 0;
  while (!w.is_zero() && !h.is_zero() && w.value() > noise && h.value() > noise) {
    if (step == max_squares) {
      cov.truncated = true;
      break;
    }
    PlacedSquare q;
    q.tag = {Provenance::Rectangle, piece, step, {}};
    if (w >= h) {
      q.side = h;
      q.center = {x + Scalar::pow2(-1) * h, y + Scalar::pow2(-1) * h};
      x += h;
      w -= h;
    } else {
      q.side = w;
      q.center = {x + Scalar::pow2(-1) * w, y + Scalar::pow2(-1) * w};
      y += w;
      h -= w;
    }
    cov.squares.push_back(q);
    ++step;
  }
  PieceInfo info;
  info.kind = Provenance::Rectangle;
  info.index = piece;
  if (cov.truncated) {
    // the greedy continuation on the residual w x h places sides summing to at most w + h
    info.residual_sides = w.value() + h.value();
    info.residual_area = w.value() * h.value();
  }
  cov.residual_area = info.residual_area;
  cov.pieces.push_back(info);
  return cov;
}

Covering rectangle_covering(const Scalar& a, const Scalar& b, int max_squares) {
  return rectangle_covering({Scalar(0), Scalar(0)}, a, b, max_squares);
}

// ---------------------------------------------------------------- triangle covering

namespace {

std::string word_key(const std::string& w) {
  std::string k = w;
  for (auto& c : k) c = c == 'u' ? '0' : '1';
  return k;
}

}  // namespace

Covering triangle_covering(const TriangularDomain& T, int m_max, int piece) {
  Covering cov;
  for (auto& s : T.strips()) cov.parts.push_back(std::move(s));
  std::vector<std::pair<std::string, TriangularDomain>> level{{"", T}};
  double placed = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    std::sort(level.begin(), level.end(),
              [](const auto& x, const auto& y) { return word_key(x.first) < word_key(y.first); });
    std::vector<std::pair<std::string, TriangularDomain>> next;
    for (auto& [w, D] : level) {
      TriangleSplit sp = triangle_split(D);
      sp.q.tag = {Provenance::Triangle, piece, m, w};
      placed += sp.q.side.value() * sp.q.side.value();
      cov.squares.push_back(sp.q);
      if (m < m_max) {
        next.push_back({"u" + w, sp.u});
        next.push_back({"r" + w, sp.r});
      }
    }
    level = std::move(next);
  }
  PieceInfo info;
  info.kind = Provenance::Triangle;
  info.index = piece;
  info.m_max = m_max;
  info.extent = std::max((T.ha() - T.hb()).value(), (T.b - T.a).value());
  info.r_max = std::max(T.c1() / (1 + T.c1()), 1 / (1 + T.c2()));
  for (int k = 0; k <= 16; ++k) {
    double x = T.a.value() + (T.b - T.a).value() * k / 16.0;
    info.graph.push_back({x, T.h(x)});
  }
  info.residual_area = std::max(0.0, T.area() - placed);
  cov.residual_area = info.residual_area;
  cov.truncated = true;
  cov.pieces.push_back(info);
  return cov;
}

// ---------------------------------------------------------------- Vitali

namespace {

// Ear clipping of a simple polygon given counterclockwise.
std::vector<Polygon> triangulate(const std::vector<Vec2>& poly) {
  std::vector<std::size_t> idx(poly.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<Polygon> out;
  auto P = [&](std::size_t i) { return Point::from(poly[i]); };
  while (idx.size() > 3) {
    bool clipped = false;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::size_t i0 = idx[(k + idx.size() - 1) % idx.size()], i1 = idx[k], i2 = idx[(k + 1) % idx.size()];
      Vec2 a = poly[i0], b = poly[i1], c = poly[i2];
      double turn = cross(b - a, c - b);
      if (turn <= 0) continue;
      std::vector<Vec2> tri{a, b, c};
      bool empty = true;
      for (auto j : idx)
        if (j != i0 && j != i1 && j != i2 && point_in_convex(poly[j], tri)) {
          empty = false;
          break;
        }
      if (!empty) continue;
      out.push_back({P(i0), P(i1), P(i2)});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) throw std::invalid_argument("polygon is not simple");
  }
  if (cross(poly[idx[1]] - poly[idx[0]], poly[idx[2]] - poly[idx[1]]) > 0) out.push_back({P(idx[0]), P(idx[1]), P(idx[2])});
  return out;
}

}  // namespace

Covering vitali_dyadic_covering(const std::vector<Vec2>& polygon_in, int n_max) {
  if (polygon_in.size() < 3) throw std::invalid_argument("polygon needs three vertices");
  std::vector<Vec2> poly = polygon_in;
  if (polygon_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  std::vector<Segment> edges;
  for (std::size_t i = 0; i < poly.size(); ++i) edges.push_back({poly[i], poly[(i + 1) % poly.size()]});
  SegmentSet boundary(edges);
  auto f = [&](Vec2 p) {
    double d = boundary.distance(p);
    return point_in_polygon(p, poly) ? d : -d;
  };
  // sup of the 1-Lipschitz f over the square exceeds eps?
  auto meets = [&](auto&& self, Vec2 c, double half, double eps, int depth) -> bool {
    double fc = f(c);
    if (fc > eps) return true;
    if (fc + half * std::sqrt(2.0) <= eps || depth == 0) return false;
    double q = 0.5 * half;
    for (Vec2 d : {Vec2{-q, -q}, Vec2{q, -q}, Vec2{q, q}, Vec2{-q, q}})
      if (self(self, c + d, q, eps, depth - 1)) return true;
    return false;
  };

  Covering cov;
  cov.parts = triangulate(poly);
  Box bb = bounding_box(poly);
  // level n squares: [i, i+1] x [j, j+1] scaled by 2^-(n+1)
  struct Cand {
    std::int64_t i, j;
  };
  std::vector<Cand> cand;
  {
    auto lo = [](double v) { return static_cast<std::int64_t>(std::floor(v * 2)); };
    auto hi = [](double v) { return static_cast<std::int64_t>(std::ceil(v * 2)); };
    for (auto i = lo(bb.x0); i < hi(bb.x1); ++i)
      for (auto j = lo(bb.y0); j < hi(bb.y1); ++j) cand.push_back({i, j});
  }
  double placed = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    double side = std::ldexp(1.0, -(n + 1)), eps = std::ldexp(1.0, -n);
    std::vector<Cand> next;
    for (auto [i, j] : cand) {
      Vec2 c{(i + 0.5) * side, (j + 0.5) * side};
      double fc = f(c);
      if (fc + 0.5 * side * std::sqrt(2.0) <= 0) continue;  // never meets the domain
      if (meets(meets, c, 0.5 * side, eps, 6)) {
        PlacedSquare q;
        q.side = Scalar::pow2(-(n + 1));
        q.center = {Scalar::dyadic(2 * i + 1, -(n + 2)), Scalar::dyadic(2 * j + 1, -(n + 2))};
        q.tag = {Provenance::Vitali, 0, n, {}};
        cov.squares.push_back(q);
        placed += side * side;
      } else if (n < n_max) {
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj) next.push_back({2 * i + di, 2 * j + dj});
      }
    }
    cand = std::move(next);
  }
  PieceInfo info;
  info.kind = Provenance::Vitali;
  info.residual_area = std::max(0.0, polygon_area(poly) - placed);
  cov.residual_area = info.residual_area;
  cov.truncated = true;
  cov.pieces.push_back(info);
  return cov;
}

// ---------------------------------------------------------------- compatible domains

Point PlacedTriangle::to_global(const Point& p) const {
  Point q = p;
  for (int k = 0; k < ((rotation % 4) + 4) % 4; ++k) q = {-q.y, q.x};
  return q + translation;
}

Vec2 PlacedTriangle::to_global(Vec2 p) const {
  Vec2 q = p;
  for (int k = 0; k < ((rotation % 4) + 4) % 4; ++k) q = {-q.y, q.x};
  return q + translation.v();
}

std::vector<Polygon> CompatibleDomain::parts() const {
  std::vector<Polygon> out;
  for (const auto& r : rectangles) out.push_back({{r[0], r[1]}, {r[2], r[1]}, {r[2], r[3]}, {r[0], r[3]}});
  for (const auto& t : triangles)
    for (auto& s : t.T.strips()) {
      for (auto& v : s) v = t.to_global(v);
      out.push_back(std::move(s));
    }
  return out;
}

CompatibleDomain assemble_compatible(CompatibleDomain spec) {
  if (spec.polygon) {
    if (!spec.rectangles.empty() || !spec.triangles.empty())
      throw SpecError("a polygon domain cannot be combined with rectangles or triangles");
    if (spec.polygon->size() < 3) throw SpecError("polygon needs three vertices");
    if (std::abs(polygon_area(*spec.polygon)) <= 0) throw SpecError("polygon has zero area");
    return spec;
  }
  if (spec.rectangles.empty() && spec.triangles.empty()) throw SpecError("empty domain");
  for (const auto& r : spec.rectangles)
    if (!(r[0] < r[2]) || !(r[1] < r[3])) throw SpecError("rectangle needs x0 < x1 and y0 < y1");
  for (std::size_t k = 0; k < spec.triangles.size(); ++k) {
    const auto& T = spec.triangles[k].T;
    auto c = alpha_compatible(T, spec.alpha);
    if (!c.compatible) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "triangle %zu is not alpha-compatible: 2*max(r_B, r_H)^(alpha+1) = %.12g >= 1 "
                    "(r_B = %.12g, r_H = %.12g, needs alpha > %.12g)",
                    k, c.ratio, c.r_b, c.r_h, alpha_threshold(T));
      throw CompatibilityError(buf);
    }
  }
  // pairwise interior disjointness of pieces
  std::vector<std::vector<std::vector<Vec2>>> pieces;
  for (const auto& r : spec.rectangles)
    pieces.push_back({{{r[0].value(), r[1].value()}, {r[2].value(), r[1].value()}, {r[2].value(), r[3].value()},
                       {r[0].value(), r[3].value()}}});
  for (const auto& t : spec.triangles) {
    std::vector<std::vector<Vec2>> parts;
    for (const auto& s : t.T.strips()) {
      std::vector<Vec2> p;
      for (const auto& v : s) p.push_back(t.to_global(v.v()));
      parts.push_back(std::move(p));
    }
    pieces.push_back(std::move(parts));
  }
  for (std::size_t i = 0; i < pieces.size(); ++i)
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      double area = 0.0;
      for (const auto& p : pieces[i])
        for (const auto& q : pieces[j]) {
          Box bp = bounding_box(p), bq = bounding_box(q);
          if (!bp.overlaps(bq)) continue;
          auto c = clip_convex(p, q);
          if (c.size() >= 3) area += std::abs(polygon_area(c));
        }
      if (area >= 1e-12) throw OverlapError("pieces " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  return spec;
}

Covering cover_domain(const CompatibleDomain& dom, const CoverOptions& opt) {
  if (dom.polygon) return vitali_dyadic_covering(*dom.polygon, opt.n_max);
  Covering out;
  auto merge = [&](Covering&& c) {
    for (auto& q : c.squares) out.squares.push_back(std::move(q));
    for (auto& p : c.pieces) out.pieces.push_back(p);
    out.truncated |= c.truncated;
    out.residual_area += c.residual_area;
  };
  for (std::size_t k = 0; k < dom.rectangles.size(); ++k) {
    const auto& r = dom.rectangles[k];
    merge(rectangle_covering({r[0], r[1]}, r[2] - r[0], r[3] - r[1], opt.max_rect_squares, static_cast<int>(k)));
  }
  for (std::size_t k = 0; k < dom.triangles.size(); ++k) {
    const auto& t = dom.triangles[k];
    Covering c = triangle_covering(t.T, opt.m_max, static_cast<int>(k));
    for (auto& q : c.squares) {
      q.center = t.to_global(q.center);
      q.rotation = ((t.rotation % 4) + 4) % 4;
    }
    for (auto& p : c.pieces)
      for (auto& v : p.graph) v = t.to_global(v);
    merge(std::move(c));
  }
  out.parts = dom.parts();
  return out;
}

SegmentSet domain_boundary(const std::vector<Polygon>& parts) {
  std::vector<ConvexCell> cells;
  for (const auto& p : parts) cells.push_back({p, kIdentity, {}});
  Arrangement arr = build_arrangement(cells, 1e-12);
  std::vector<Segment> segs;
  for (const auto& f : arr.interfaces)
    if (!f.shared()) segs.push_back({f.a.v(), f.b.v()});
  return SegmentSet(std::move(segs));
}

// ---------------------------------------------------------------- spec files

namespace {

Scalar num(const json& j, const char* what) {
  if (j.is_number_integer()) return Scalar(static_cast<int>(j.get<std::int64_t>()));
  if (j.is_number()) return Scalar::from_double(j.get<double>());
  if (j.is_string()) {
    auto s = Scalar::parse(j.get<std::string>());
    if (s) return *s;
  }
  throw SpecError(std::string("bad number for ") + what + ": " + j.dump());
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw SpecError(std::string("unknown key '") + it.key() + "' in " + where);
}

MonotoneProfile parse_profile(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw SpecError("profile needs a type");
  std::string type = j.at("type").get<std::string>();
  try {
    if (type == "linear") {
      only_keys(j, {"type", "c0", "c1"}, "linear profile");
      return MonotoneProfile::linear(num(j.at("c0"), "c0"), num(j.at("c1"), "c1"));
    }
    if (type == "spline") {
      only_keys(j, {"type", "knots"}, "spline profile");
      std::vector<MonotoneProfile::Knot> knots;
      for (const auto& k : j.at("knots")) {
        if (!k.is_array() || k.size() != 3) throw SpecError("spline knot must be [t, value, slope]");
        knots.push_back({num(k[0], "knot").value(), num(k[1], "value").value(), num(k[2], "slope").value()});
      }
      return MonotoneProfile::spline(std::move(knots));
    }
  } catch (const SpecError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  throw SpecError("unknown profile type '" + type + "'");
}

}  // namespace

CompatibleDomain parse_domain_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("domain spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SpecError("domain spec must be an object");
  CompatibleDomain d;
  try {
    only_keys(j, {"alpha", "rectangles", "triangles", "polygon"}, "domain spec");
    if (j.contains("alpha")) d.alpha = num(j["alpha"], "alpha").value();
    if (j.contains("rectangles"))
      for (const auto& r : j["rectangles"]) {
        if (!r.is_array() || r.size() != 4) throw SpecError("rectangle must be [x0, y0, x1, y1]");
        d.rectangles.push_back({num(r[0], "x0"), num(r[1], "y0"), num(r[2], "x1"), num(r[3], "y1")});
      }
    if (j.contains("triangles"))
      for (const auto& t : j["triangles"]) {
        only_keys(t, {"a", "b", "h", "rotation", "translation"}, "triangle");
        PlacedTriangle pt;
        try {
          pt.T = make_triangle(num(t.at("a"), "a"), num(t.at("b"), "b"), parse_profile(t.at("h")));
        } catch (const SpecError&) {
          throw;
        } catch (const std::invalid_argument& e) {
          throw SpecError(e.what());
        }
        int deg = t.value("rotation", 0);
        if (deg % 90 != 0) throw SpecError("rotation must be a multiple of 90 degrees");
        pt.rotation = ((deg / 90) % 4 + 4) % 4;
        if (t.contains("translation")) {
          const auto& tr = t["translation"];
          if (!tr.is_array() || tr.size() != 2) throw SpecError("translation must be [x, y]");
          pt.translation = {num(tr[0], "translation"), num(tr[1], "translation")};
        }
        d.triangles.push_back(std::move(pt));
      }
    if (j.contains("polygon")) {
      std::vector<Vec2> poly;
      for (const auto& p : j["polygon"]) {
        if (!p.is_array() || p.size() != 2) throw SpecError("polygon vertex must be [x, y]");
        poly.push_back({num(p[0], "x").value(), num(p[1], "y").value()});
      }
      d.polygon = std::move(poly);
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed domain spec: ") + e.what());
  }
  return d;
}

CompatibleDomain load_domain_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot read domain spec " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_domain_spec(ss.str());
}

// ---------------------------------------------------------------- covering files

namespace {

json point_json(const Point& p) { return json::array({p.x.str(), p.y.str()}); }

json graph_json(const std::vector<Vec2>& pts) {
  json out = json::array();
  for (auto v : pts) out.push_back({v.x, v.y});
  return out;
}

Scalar scalar_of(const json& j) {
  auto s = Scalar::parse(j.get<std::string>());
  if (!s) throw SpecError("bad number in covering file: " + j.dump());
  return *s;
}

Point point_of(const json& j) { return {scalar_of(j.at(0)), scalar_of(j.at(1))}; }

const char* kind_name(Provenance::Kind k) {
  return k == Provenance::Rectangle ? "rectangle" : k == Provenance::Triangle ? "triangle" : "vitali";
}

}  // namespace

std::string write_covering(const Covering& cov) {
  json j;
  j["format"] = "vpyr-covering-1";
  j["truncated"] = cov.truncated;
  j["residual_area"] = cov.residual_area;
  j["parts"] = json::array();
  for (const auto& p : cov.parts) {
    json poly = json::array();
    for (const auto& v : p) poly.push_back(point_json(v));
    j["parts"].push_back(poly);
  }
  j["pieces"] = json::array();
  for (const auto& p : cov.pieces)
    j["pieces"].push_back({{"kind", kind_name(p.kind)},
                           {"index", p.index},
                           {"residual_sides", p.residual_sides},
                           {"residual_area", p.residual_area},
                           {"m_max", p.m_max},
                           {"extent", p.extent},
                           {"r_max", p.r_max},
                           {"graph", graph_json(p.graph)}});
  j["squares"] = json::array();
  for (const auto& q : cov.squares)
    j["squares"].push_back(
        {{"center", point_json(q.center)}, {"side", q.side.str()}, {"rotation", q.rotation}, {"tag", q.tag.str()}});
  return j.dump(1) + "\n";
}

Covering read_covering(const std::string& text) {
  Covering cov;
  try {
    json j = json::parse(text);
    if (j.value("format", "") != "vpyr-covering-1") throw SpecError("not a covering file");
    cov.truncated = j.at("truncated").get<bool>();
    cov.residual_area = j.at("residual_area").get<double>();
    for (const auto& p : j.at("parts")) {
      Polygon poly;
      for (const auto& v : p) poly.push_back(point_of(v));
      cov.parts.push_back(std::move(poly));
    }
    for (const auto& p : j.at("pieces")) {
      PieceInfo info;
      std::string k = p.at("kind").get<std::string>();
      info.kind = k == "rectangle" ? Provenance::Rectangle : k == "triangle" ? Provenance::Triangle : Provenance::Vitali;
      info.index = p.at("index").get<int>();
      info.residual_sides = p.at("residual_sides").get<double>();
      info.residual_area = p.at("residual_area").get<double>();
      info.m_max = p.at("m_max").get<int>();
      info.extent = p.at("extent").get<double>();
      info.r_max = p.value("r_max", 0.0);
      if (p.contains("graph"))
        for (const auto& v : p.at("graph")) info.graph.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      cov.pieces.push_back(info);
    }
    for (const auto& s : j.at("squares")) {
      PlacedSquare q;
      q.center = point_of(s.at("center"));
      q.side = scalar_of(s.at("side"));
      q.rotation = s.at("rotation").get<int>();
      auto tag = Provenance::parse(s.at("tag").get<std::string>());
      if (!tag) throw SpecError("bad square tag");
      q.tag = *tag;
      cov.squares.push_back(q);
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed covering file: ") + e.what());
  }
  return cov;
}

}  // namespace vpyr
