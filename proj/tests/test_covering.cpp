#include <doctest.h>

#include <cmath>
#include <numeric>

#include "vpyr/covering.hpp"

using namespace vpyr;

namespace {

Scalar S(const char* s) { return *Scalar::parse(s); }

// Independent greedy on integers: repeatedly cut the largest square off the
// bottom-left of the remaining rectangle.
std::vector<long> brute_greedy(long w, long h) {
  std::vector<long> sides;
  while (w > 0 && h > 0) {
    long s = std::min(w, h);
    sides.push_back(s);
    if (w >= h) w -= s;
    else h -= s;
  }
  return sides;
}

TriangularDomain unit_triangle() { return make_triangle(0, 1, MonotoneProfile::linear(1, -1)); }

bool inside_triangle(const TriangularDomain& T, const PlacedSquare& q, double tol) {
  for (const auto& v : q.polygon())
    if (!T.contains(v.v(), tol)) return false;
  return true;
}

// Sides and centers here are short dyadics, so doubles compare them exactly.
bool interiors_disjoint(const PlacedSquare& p, const PlacedSquare& q) {
  double hp = 0.5 * p.side.value(), hq = 0.5 * q.side.value();
  Vec2 a = p.center.v(), b = q.center.v();
  return a.x + hp <= b.x - hq || b.x + hq <= a.x - hp || a.y + hp <= b.y - hq || b.y + hq <= a.y - hp;
}

std::size_t overlapping_pairs(const Covering& c) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < c.squares.size(); ++i)
    for (std::size_t j = i + 1; j < c.squares.size(); ++j) bad += !interiors_disjoint(c.squares[i], c.squares[j]);
  return bad;
}

}  // namespace

TEST_CASE("rectangle covering examples") {
  auto one = rectangle_covering(1, 1, 100);
  REQUIRE(one.squares.size() == 1);
  CHECK(one.squares[0].side == Scalar(1));
  auto r32 = rectangle_covering(3, 2, 100);
  REQUIRE(r32.squares.size() == 3);
  CHECK(r32.squares[0].side == Scalar(2));
  CHECK(r32.squares[1].side == Scalar(1));
  CHECK(r32.squares[2].side == Scalar(1));
  CHECK(r32.side_sum() == 4.0);
  CHECK_FALSE(r32.truncated);
  CHECK(r32.residual_area == 0.0);
  CHECK(overlapping_pairs(r32) == 0);
  // dyadic sides stay exact
  auto dy = rectangle_covering(S("3/4"), S("5/16"), 100);
  Scalar area;
  for (const auto& q : dy.squares) area += q.side * q.side;
  CHECK(area == S("15/64"));
}

TEST_CASE("rectangle side sum is a + b - gcd against brute force") {
  for (long a = 1; a <= 50; ++a)
    for (long b = 1; b <= a; ++b) {
      auto cov = rectangle_covering(Scalar(static_cast<int>(a)), Scalar(static_cast<int>(b)), 10000);
      auto oracle = brute_greedy(a, b);
      REQUIRE(cov.squares.size() == oracle.size());
      long sum = 0;
      for (std::size_t k = 0; k < oracle.size(); ++k) {
        CHECK(cov.squares[k].side == Scalar(static_cast<int>(oracle[k])));
        sum += oracle[k];
      }
      CHECK(sum == a + b - std::gcd(a, b));
      CHECK(cov.side_sum() <= a + b);
    }
}

TEST_CASE("golden rectangle approaches phi + 1") {
  double phi = (1 + std::sqrt(5.0)) / 2;
  auto c20 = rectangle_covering(Scalar::real(phi), 1, 20);
  CHECK(c20.truncated);
  CHECK(c20.squares.size() == 20);
  // sides are phi^-k, k = 0..19: the partial geometric sum
  double oracle = (phi + 1) * (1 - std::pow(phi, -20));
  CHECK(std::abs(c20.side_sum() - oracle) < 1e-12);
  CHECK(c20.side_sum() <= phi + 1);
  auto c40 = rectangle_covering(Scalar::real(phi), 1, 40);
  CHECK(std::abs(c40.side_sum() - (phi + 1)) < 1e-6);
  CHECK(c40.pieces[0].residual_sides > 0);
  CHECK(c40.side_sum() + c40.pieces[0].residual_sides >= phi + 1 - 1e-12);
}

TEST_CASE("triangle split of the unit triangle") {
  auto T = unit_triangle();
  auto sp = triangle_split(T);
  CHECK(sp.x0 == S("1/2"));
  CHECK(sp.q.side == S("1/2"));
  CHECK(sp.q.center == Point{S("1/4"), S("1/4")});
  CHECK(sp.u.a == Scalar(0));
  CHECK(sp.u.b == S("1/2"));
  CHECK(sp.u.hb() == S("1/2"));
  CHECK((sp.u.ha() - sp.u.hb()) == S("1/2"));
  CHECK(sp.r.a == S("1/2"));
  CHECK(sp.r.hb() == Scalar(0));
  double parts = sp.q.side.value() * sp.q.side.value() + sp.u.area() + sp.r.area();
  CHECK(std::abs(parts - T.area()) < 1e-10);
}

TEST_CASE("triangle split partitions a curved triangle") {
  // h decreasing from 2 to 0 on [0, 1.5] with slopes -1 and -2 at the ends
  auto h = MonotoneProfile::spline({{0, 2, -1}, {1.5, 0, -2}});
  auto T = make_triangle(0, S("3/2"), h);
  std::vector<TriangularDomain> todo{T};
  for (int it = 0; it < 31; ++it) {
    auto D = todo[it];
    auto sp = triangle_split(D);
    // the square's top-right corner is under the graph, the root is sharp
    CHECK(sp.q.center.y.value() + 0.5 * sp.q.side.value() <= h(sp.x0.value()) + 1e-15);
    CHECK(std::abs(h(sp.x0.value()) - (sp.x0.value() + D.hb().value() - D.a.value())) < 1e-10);
    double parts = sp.q.side.value() * sp.q.side.value() + sp.u.area() + sp.r.area();
    CHECK(std::abs(parts - D.area()) < 1e-10);
    CHECK(inside_triangle(T, sp.q, 1e-12));
    todo.push_back(sp.u);
    todo.push_back(sp.r);
  }
  CHECK_THROWS_WITH(triangle_split(TriangularDomain{1, 0, MonotoneProfile::linear(1, -1)}), "malformed triangle");
}

TEST_CASE("triangle covering counts, words and sides") {
  auto T = unit_triangle();
  CHECK(triangle_covering(T, 0).squares.size() == 1);
  auto c2 = triangle_covering(T, 2);
  REQUIRE(c2.squares.size() == 7);
  std::vector<std::string> words;
  for (const auto& q : c2.squares) words.push_back(q.tag.word);
  CHECK(words == std::vector<std::string>{"", "u", "r", "uu", "ur", "ru", "rr"});
  auto c6 = triangle_covering(T, 6);
  CHECK(c6.squares.size() == 127);
  double area = 0;
  for (const auto& q : c6.squares) {
    CHECK(q.side == Scalar::pow2(-(q.tag.step + 1)));
    CHECK(inside_triangle(T, q, 0.0));
    area += q.side.value() * q.side.value();
  }
  CHECK(overlapping_pairs(c6) == 0);
  // every step fills half of what is left
  CHECK(std::abs(T.area() - area - 0.5 * std::pow(0.5, 7)) < 1e-15);
  CHECK(c6.pieces[0].extent == 1.0);
}

TEST_CASE("triangle covering side decay") {
  auto h = MonotoneProfile::spline({{0, 3, -0.5}, {1, 2, -1.5}, {2, 0, -2.5}});
  auto T = make_triangle(0, 2, h);
  auto c = alpha_compatible(T, 1.0);
  double r = std::max(c.r_b, c.r_h);
  double M = std::max((T.ha() - T.hb()).value(), (T.b - T.a).value());
  auto cov = triangle_covering(T, 8);
  for (const auto& q : cov.squares) {
    CHECK(q.side.value() <= M * std::pow(r, q.tag.step + 1) + 1e-12);
    CHECK(inside_triangle(T, q, 1e-12));
  }
}

TEST_CASE("alpha compatibility") {
  auto T = unit_triangle();
  for (double a : {0.1, 0.5, 1.0, 2.0}) CHECK(alpha_compatible(T, a).compatible);
  auto at0 = alpha_compatible(T, 0.0);
  CHECK_FALSE(at0.compatible);
  CHECK(at0.ratio == 1.0);
  CHECK(at0.r_b == 0.5);
  CHECK(at0.r_h == 0.5);
  // h' ranges over [-4, -1/4]
  auto h = MonotoneProfile::spline({{0, 2, -4}, {1, 0, -0.25}});
  auto W = make_triangle(0, 1, h);
  CHECK(W.c1() == doctest::Approx(4.0));
  CHECK(W.c2() == doctest::Approx(0.25));
  auto c = alpha_compatible(W, 1.0);
  CHECK(c.r_b == doctest::Approx(0.8));
  CHECK(c.r_h == doctest::Approx(0.8));
  // root of 2 x^(a+1) = 1 for x = 4/5 by bisection
  double lo = 0, hi = 10;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (2 * std::pow(0.8, mid + 1) < 1 ? hi : lo) = mid;
  }
  CHECK(alpha_threshold(W) == doctest::Approx(lo).epsilon(1e-9));
  CHECK(std::abs(lo - 2.106) < 0.01);
  CHECK_FALSE(alpha_compatible(W, lo - 0.01).compatible);
  CHECK(alpha_compatible(W, lo + 0.01).compatible);
}

TEST_CASE("spline profiles must decrease strictly") {
  CHECK_THROWS(MonotoneProfile::spline({{0, 1, -1}, {1, 0, 0}}));
  CHECK_THROWS(MonotoneProfile::spline({{0, 1, 1}, {1, 0, -1}}));
  CHECK_THROWS(MonotoneProfile::linear(1, 0));
  auto h = MonotoneProfile::spline({{0, 1, -1}, {1, 0, -1}});
  CHECK(h(0.5) == doctest::Approx(0.5));
  CHECK(h.integral(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("vitali covering of a square of side 8") {
  std::vector<Vec2> sq{{-4, -4}, {4, -4}, {4, 4}, {-4, 4}};
  auto cov = vitali_dyadic_covering(sq, 5);
  REQUIRE(!cov.squares.empty());
  int level0 = 0;
  for (const auto& q : cov.squares) {
    double diag = q.side.value() * std::sqrt(2.0);
    CHECK(diag < std::ldexp(1.0, -q.tag.step));
    if (q.tag.step == 0) ++level0;
    for (const auto& v : q.polygon()) CHECK(point_in_convex(v.v(), sq));
  }
  CHECK(level0 > 0);
  CHECK(overlapping_pairs(cov) == 0);
}

TEST_CASE("vitali uncovered area inside the inner parallel set shrinks") {
  // a convex pentagon, so the inner parallel set is a half-plane intersection
  std::vector<Vec2> poly{{0, 0}, {3, 0}, {3.5, 2}, {1.5, 3.2}, {-0.4, 1.8}};
  double delta = 0.25;
  std::vector<Vec2> inner = poly;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % poly.size()], d = b - a;
    Vec2 n = (1.0 / norm(d)) * Vec2{-d.y, d.x};
    inner = clip_halfplane(inner, a + delta * n, n);
  }
  double inner_area = polygon_area(inner);
  double prev = 1e300;
  for (int n = 1; n <= 7; ++n) {
    auto cov = vitali_dyadic_covering(poly, n);
    double covered = 0;
    for (const auto& q : cov.squares) {
      auto c = clip_convex(to_vec(q.polygon()), inner);
      if (c.size() >= 3) covered += polygon_area(c);
    }
    double gap = inner_area - covered;
    CHECK(gap >= -1e-12);
    CHECK(gap <= prev + 1e-12);
    prev = gap;
    for (const auto& q : cov.squares)
      for (const auto& v : q.polygon()) CHECK(point_in_polygon(v.v(), poly));
  }
  // at level 7 the band left uncovered is thinner than delta
  CHECK(prev < 1e-12);
}

TEST_CASE("assembling compatible domains") {
  CompatibleDomain unit;
  unit.rectangles.push_back({0, 0, 1, 1});
  CHECK_NOTHROW(assemble_compatible(unit));
  CHECK(domain_boundary(unit.parts()).length() == doctest::Approx(4.0));

  CompatibleDomain L;
  L.rectangles.push_back({0, 0, 2, 1});
  L.rectangles.push_back({0, 1, 1, 2});
  CHECK_NOTHROW(assemble_compatible(L));
  CHECK(domain_boundary(L.parts()).length() == doctest::Approx(8.0));

  CompatibleDomain trap;
  trap.alpha = 1.0;
  trap.rectangles.push_back({0, 0, 1, 1});
  trap.triangles.push_back({unit_triangle(), 0, {1, 0}});
  CHECK_NOTHROW(assemble_compatible(trap));
  CHECK(domain_boundary(trap.parts()).length() == doctest::Approx(4.0 + std::sqrt(2.0)));

  CompatibleDomain overlap;
  overlap.rectangles.push_back({0, 0, 2, 2});
  overlap.rectangles.push_back({1, 1, 3, 3});
  CHECK_THROWS_AS(assemble_compatible(overlap), OverlapError);

  CompatibleDomain steep;
  steep.alpha = 1.0;
  steep.triangles.push_back({make_triangle(0, 1, MonotoneProfile::spline({{0, 2, -4}, {1, 0, -0.25}})), 0, {}});
  try {
    assemble_compatible(steep);
    FAIL("expected a compatibility error");
  } catch (const CompatibilityError& e) {
    std::string msg = e.what();
    CHECK(msg.find("r_B = 0.8") != std::string::npos);
    CHECK(msg.find("2.10") != std::string::npos);
  }
}

TEST_CASE("rotated triangle pieces") {
  CompatibleDomain d;
  d.alpha = 1.0;
  d.rectangles.push_back({0, 0, 1, 1});
  // the unit triangle turned a quarter turn sits left of the square
  d.triangles.push_back({unit_triangle(), 1, {0, 0}});
  CHECK_NOTHROW(assemble_compatible(d));
  auto cov = cover_domain(d, {64, 3, 0});
  std::size_t tri = 0;
  for (const auto& q : cov.squares)
    if (q.tag.kind == Provenance::Triangle) {
      ++tri;
      CHECK(q.rotation == 1);
      CHECK(q.center.x < Scalar(0));
    }
  CHECK(tri == 15);
  CHECK(domain_boundary(cov.parts).length() == doctest::Approx(4.0 + std::sqrt(2.0)));
}

TEST_CASE("domain spec parsing") {
  auto d = parse_domain_spec(R"({"alpha": "1", "rectangles": [["0", "0", "3", "2"]],
    "triangles": [{"a": 0, "b": "1", "h": {"type": "linear", "c0": "1", "c1": "-1"},
                   "rotation": 90, "translation": ["3/2^1", 0]}]})");
  CHECK(d.alpha == 1.0);
  REQUIRE(d.rectangles.size() == 1);
  CHECK(d.rectangles[0][2] == Scalar(3));
  REQUIRE(d.triangles.size() == 1);
  CHECK(d.triangles[0].rotation == 1);
  CHECK(d.triangles[0].translation.x == S("3/2"));
  auto s = parse_domain_spec(R"({"triangles": [{"a": 0, "b": 1, "h": {"type": "spline", "knots": [[0, 2, -4], [1, 0, "-1/4"]]}}]})");
  CHECK(s.triangles[0].T.c2() == doctest::Approx(0.25));
  auto p = parse_domain_spec(R"({"polygon": [[0,0],[1,0],[0,1]]})");
  CHECK(p.polygon->size() == 3);
  CHECK_THROWS_AS(parse_domain_spec("{"), SpecError);
  CHECK_THROWS_AS(parse_domain_spec(R"({"rectangles": [[0, 0, 1]]})"), SpecError);
  CHECK_THROWS_AS(parse_domain_spec(R"({"rectangle": []})"), SpecError);
  CHECK_THROWS_AS(parse_domain_spec(R"({"triangles": [{"a": 0, "b": 1, "h": {"type": "linear", "c0": 1, "c1": 1}}]})"),
                  SpecError);
  CHECK_THROWS_AS(parse_domain_spec(R"({"rectangles": [["x", 0, 1, 1]]})"), SpecError);
}

TEST_CASE("covering files round trip") {
  CompatibleDomain d;
  d.rectangles.push_back({0, 0, 3, 2});
  d.triangles.push_back({unit_triangle(), 0, {3, 0}});
  auto cov = cover_domain(assemble_compatible(d), {64, 3, 0});
  std::string text = write_covering(cov);
  auto back = read_covering(text);
  REQUIRE(back.squares.size() == cov.squares.size());
  for (std::size_t i = 0; i < cov.squares.size(); ++i) {
    CHECK(back.squares[i].center == cov.squares[i].center);
    CHECK(back.squares[i].side == cov.squares[i].side);
    CHECK(back.squares[i].tag.str() == cov.squares[i].tag.str());
  }
  CHECK(back.parts.size() == cov.parts.size());
  CHECK(back.pieces.size() == cov.pieces.size());
  CHECK(write_covering(back) == text);
  CHECK_THROWS_AS(read_covering("{}"), SpecError);
}
