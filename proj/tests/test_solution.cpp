#include <doctest.h>

#include <cmath>

#include "vpyr/pyramid.hpp"
#include "vpyr/solution.hpp"

using namespace vpyr;

namespace {

Covering pyramid_covering() {
  Covering cov;
  PlacedSquare q;
  q.side = 4;
  q.center = {0, 0};
  cov.squares.push_back(q);
  cov.parts.push_back({{-2, -2}, {2, -2}, {2, 2}, {-2, 2}});
  return cov;
}

Covering rect_covering(int a, int b) {
  CompatibleDomain d;
  d.rectangles.push_back({0, 0, a, b});
  return cover_domain(assemble_compatible(d), {});
}

Polygon square_poly(const PyramidSquare& q) { return {{q.x0, q.y0}, {q.x1, q.y0}, {q.x1, q.y1}, {q.x0, q.y1}}; }

// Values on the axis by direct partial sums, written independently of the library.
double axis_even(double (*s)(int), int n) {
  double v = -s(2 * n);
  double sign = 1;
  for (int k = 1; k < 2 * n; ++k, sign = -sign) v += 2 * sign * s(k);
  return v;
}
double axis_odd(double (*s)(int), int n) {
  double v = s(2 * n + 1);
  double sign = 1;
  for (int k = 1; k <= 2 * n; ++k, sign = -sign) v += 2 * sign * s(k);
  return v;
}
double harmonic(int j) { return 1.0 / j; }

}  // namespace

TEST_CASE("the pyramid is its own one-square solution") {
  auto sol = build_solution(pyramid_covering(), 4);
  auto ref = pv_cells(4);
  REQUIRE(sol.map.cells.size() == ref.cells.size());
  for (std::size_t i = 0; i < ref.cells.size(); ++i) {
    CHECK(sol.map.cells[i].gradient == ref.cells[i].gradient);
    CHECK(sol.map.cells[i].offset == ref.cells[i].offset);
    CHECK(sol.map.cells[i].vertices == ref.cells[i].vertices);
  }
  CHECK(sol.sigma.length() == doctest::Approx(16.0));
  CHECK(sol.boundary.length() == doctest::Approx(16.0));
}

TEST_CASE("rotated transplants give the same map") {
  auto cov = pyramid_covering();
  auto plain = build_solution(cov, 3);
  cov.squares[0].rotation = 1;
  auto turned = build_solution(cov, 3);
  CellIndex ip(plain.map.cells), it(turned.map.cells);
  for (double x = -1.9; x < 1.9; x += 0.0731)
    for (double y = -1.9; y < 1.9; y += 0.0613) {
      auto a = evaluate(plain.map, ip, {x, y}), b = evaluate(turned.map, it, {x, y});
      REQUIRE(a.has_value() == b.has_value());
      if (a) CHECK(norm(*a - *b) == 0.0);
    }
}

TEST_CASE("verification passes on the pyramid at depth 6") {
  auto sol = build_solution(pyramid_covering(), 6);
  auto rep = verify_solution(sol, 20000, {0.1, 0.5}, 3, 4);
  CHECK(rep.bad_cells.empty());
  CHECK(rep.inclusion_fraction == 1.0);
  CHECK(rep.fd_max_error < 1e-5);
  CHECK(rep.continuity_exact);
  CHECK(rep.continuity.max_defect == Scalar(0));
  CHECK(rep.continuity.overlaps == 0);
  CHECK(rep.boundary_sup_ratio <= 1.0);
  CHECK(rep.trace_ratio <= 1.0);
  REQUIRE(rep.h1.size() == 2);
  for (const auto& c : rep.h1) {
    CHECK(c.checked);
    CHECK(c.connected);
    CHECK(c.sigma_length == 0.0);
  }
  CHECK(rep.ok());
  // a different thread count gives the same report
  auto again = verify_solution(sol, 20000, {0.1, 0.5}, 3, 1);
  CHECK(again.fd_max_error == rep.fd_max_error);
  CHECK(again.samples_in_E == rep.samples_in_E);
}

TEST_CASE("fault injection is caught and localized") {
  auto sol = build_solution(pyramid_covering(), 3);
  std::size_t victim = 137;
  auto broken = sol;
  broken.map.cells[victim].gradient = Mat2i{{2, 0, 0, 1}};
  auto rep = verify_solution(broken, 5000, {}, 1);
  REQUIRE(rep.bad_cells.size() == 1);
  CHECK(rep.bad_cells[0] == victim);
  CHECK_FALSE(rep.ok());

  // swapping in another matrix of E breaks continuity at that cell
  auto swapped = sol;
  swapped.map.cells[victim].gradient = -swapped.map.cells[victim].gradient;
  auto rep2 = verify_solution(swapped, 1000, {}, 1);
  CHECK(rep2.bad_cells.empty());
  CHECK(rep2.continuity.max_defect > Scalar(0));
  auto arr = build_arrangement(swapped.map.cells);
  const auto& worst = arr.interfaces[rep2.continuity.worst_interface];
  CHECK((worst.pos == static_cast<int>(victim) || worst.neg == static_cast<int>(victim)));
  CHECK_FALSE(rep2.ok());
}

TEST_CASE("rectangle solution") {
  auto cov = rect_covering(3, 2);
  auto sol = build_solution(cov, 4);
  // boundary 10, inner edges x = 2 (length 2) and y = 1 on [2, 3]
  CHECK(sol.sigma.length() == doctest::Approx(13.0));
  CHECK(sol.sigma.length() <= 4 * (3 + 2));
  auto rep = verify_solution(sol, 5000, {0.05, 0.3, 0.9}, 2);
  CHECK(rep.continuity_exact);
  CHECK(rep.continuity.max_defect == Scalar(0));
  CHECK(rep.bad_cells.empty());
  CHECK(rep.trace_ratio <= 1.0);
  CHECK(rep.boundary_sup_ratio <= 1.0);
  for (const auto& c : rep.h1) {
    CHECK(c.checked);
    CHECK(c.connected);
  }
  // at delta = 0.3 the inner edges inside [0.3, 2.7] x [0.3, 1.7]
  CHECK(rep.h1[1].sigma_length == doctest::Approx(1.4 + 0.7));
  CHECK(rep.ok());
}

TEST_CASE("Vitali solution meets each inner set in finitely many squares") {
  std::vector<Vec2> poly{{0, 0}, {3, 0}, {3.5, 2}, {1.5, 3.2}, {-0.4, 1.8}};
  auto cov = vitali_dyadic_covering(poly, 3);
  auto sol = build_solution(cov, 2);
  auto rep = verify_solution(sol, 2000, {0.5, 0.25}, 5);
  CHECK(rep.bad_cells.empty());
  CHECK(rep.continuity.max_defect == Scalar(0));
  CHECK(rep.continuity.overlaps == 0);
  REQUIRE(rep.h1.size() == 2);
  CHECK(rep.h1[0].checked);
  CHECK(rep.h1[0].squares_meeting > 0);
  CHECK(rep.h1[0].squares_meeting <= cov.squares.size());
  CHECK(rep.h1[0].squares_meeting <= rep.h1[1].squares_meeting);
  CHECK(rep.h1[0].connected);
}

TEST_CASE("non-convex domains skip the connectivity check") {
  CompatibleDomain L;
  L.rectangles.push_back({0, 0, 2, 1});
  L.rectangles.push_back({0, 1, 1, 2});
  auto sol = build_solution(cover_domain(assemble_compatible(L), {}), 2);
  auto rep = verify_solution(sol, 100, {0.1}, 1);
  CHECK_FALSE(rep.h1[0].checked);
  CHECK_FALSE(inner_parallel_convex(sol.covering.parts, 0.1).has_value());
}

TEST_CASE("density at a boundary point") {
  auto sol = build_solution(pyramid_covering(), 7);
  auto prof = density_profile(sol, {2, 0}, {0.125});
  REQUIRE(prof.size() == 1);
  for (double a : prof[0].area) CHECK(a >= 1.0 / 8192);
  CHECK(prof[0].labels_clearing == 8);
  CHECK_THROWS_WITH(density_profile(sol, {2, 0}, {1.0 / 64}), "insufficient depth");
}

TEST_CASE("density inside a cell is all one label") {
  auto sol = build_solution(pyramid_covering(), 2);
  const auto& cell = sol.map.cells[5];
  Vec2 c = centroid(cell.vertices).v();
  double r = 1e-3;
  auto prof = density_profile(sol, c, {r}, 1.0 / 128);
  int full = 0;
  for (double a : prof[0].area) {
    if (std::abs(a - M_PI * r * r) < 1e-15) ++full;
    else CHECK(a < 1e-18);
  }
  CHECK(full == 1);
}

TEST_CASE("two neighbouring squares hold every label") {
  for (int k = 2; k <= 4; ++k) {
    auto map = pv_cells(k);
    for (std::int64_t j = 0; j + 1 <= (std::int64_t{1} << k) - 3; j += 2) {
      auto areas = label_areas(map.cells, {square_poly(PyramidLayout::square(k, j)), square_poly(PyramidLayout::square(k, j + 1))});
      Scalar bound = Scalar::pow2(-3 - 2 * k);
      for (const auto& a : areas) CHECK(a >= bound);
    }
  }
}

TEST_CASE("cell files round trip") {
  auto sol = build_solution(rect_covering(3, 2), 2);
  std::string text = export_cells(sol.map);
  auto back = import_cells(text);
  REQUIRE(back.cells.size() == sol.map.cells.size());
  for (std::size_t i = 0; i < back.cells.size(); ++i) {
    CHECK(back.cells[i].gradient == sol.map.cells[i].gradient);
    CHECK(back.cells[i].offset == sol.map.cells[i].offset);
    CHECK(back.cells[i].vertices == sol.map.cells[i].vertices);
  }
  CHECK(back.untiled.size() == sol.map.untiled.size());
  CHECK(back.domain.size() == sol.map.domain.size());
  CHECK(export_cells(back) == text);
  CHECK_THROWS(import_cells("nonsense"));
}

TEST_CASE("accordion is continuous with gradients in E") {
  auto map = build_accordion(harmonic_accordion(6));
  CHECK(map.cells.size() == 6 * 16);
  for (const auto& c : map.cells) CHECK(SignedMatrix::from_matrix(c.gradient).has_value());
  auto arr = build_arrangement(map.cells, 1e-12);
  auto rep = check_continuity(map.cells, arr);
  CHECK(rep.max_defect.value() <= 1e-12);
  CHECK(rep.overlaps == 0);
  CHECK(rep.shared_edges > 0);
  CellIndex index(map.cells);
  auto at1 = evaluate(map, index, {1, 0});
  REQUIRE(at1);
  CHECK(std::abs(at1->x) < 1e-15);
  CHECK(std::abs(at1->y - 1.0) < 1e-15);
}

TEST_CASE("accordion axis values") {
  int frames = 21;
  auto spec = harmonic_accordion(frames);
  auto map = build_accordion(spec);
  CellIndex index(map.cells);
  auto v2 = evaluate(map, index, {0.5, 0});
  REQUIRE(v2);
  CHECK(v2->y == doctest::Approx(1.5).epsilon(1e-15));
  for (int n = 1; n <= 20; ++n) {
    auto ve = evaluate(map, index, {spec.s(2 * n), 0});
    auto vo = evaluate(map, index, {spec.s(2 * n + 1), 0});
    REQUIRE(ve);
    REQUIRE(vo);
    CHECK(std::abs(ve->x) <= 1e-12);
    CHECK(std::abs(ve->y - axis_even(harmonic, n)) <= 1e-12);
    CHECK(std::abs(vo->y - axis_odd(harmonic, n)) <= 1e-12);
    CHECK(std::abs(accordion_axis_even(spec.s, n) - axis_even(harmonic, n)) <= 1e-12);
    CHECK(std::abs(accordion_axis_odd(spec.s, n) - axis_odd(harmonic, n)) <= 1e-12);
  }
}

TEST_CASE("accordion jump length grows like the harmonic series") {
  double prev = 0.0;
  for (int N : {2, 4, 8, 16}) {
    auto map = build_accordion(harmonic_accordion(N));
    double L = jump_length(map.cells);
    CHECK(L > prev);
    // perimeters of the squares at radii s_2 .. s_{2N+1} plus bounded radial pieces
    double perim = 0;
    for (int j = 2; j <= 2 * N + 1; ++j) perim += 8.0 / j;
    CHECK(L >= perim - 1e-9);
    CHECK(L <= perim + 8 * std::sqrt(2.0));
    prev = L;
  }
}

TEST_CASE("accordion rejects non-decreasing sequences") {
  CHECK_THROWS_AS(build_accordion({[](int j) { return j == 3 ? 0.6 : 1.0 / j; }, 2}), std::invalid_argument);
  CHECK_THROWS_AS(build_accordion({[](int j) { return 2.0 / j; }, 2}), std::invalid_argument);
}

TEST_CASE("empty coverings are rejected") { CHECK_THROWS_AS(build_solution(Covering{}, 3), std::invalid_argument); }
