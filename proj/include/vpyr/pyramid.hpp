#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vpyr/geometry.hpp"
#include "vpyr/piecewise_map.hpp"

namespace vpyr {

// The four profiles on [-1,1]^2 the pyramid is built from.
enum class BaseFn { A, B, C, D };

double base_a(double x, double y);
double base_b(double x, double y);
double base_c(double x, double y);
double base_d(double x, double y);
double base_value(BaseFn f, double x, double y);
// Exact evaluation. For c and d every case whose condition holds is
// evaluated and they must agree; a disagreement throws std::logic_error.
Scalar base_value(BaseFn f, const Scalar& x, const Scalar& y);
// 2^-k f(2^k x, 2^k y)
double rescale(BaseFn f, int k, double x, double y);

// Octants of [-1,1]^2 counterclockwise from the positive x axis:
// 0 right-upper, 1 top-right, 2 top-left, 3 left-upper,
// 4 left-lower, 5 bottom-left, 6 bottom-right, 7 right-lower.
// Returns -1 on a sector line or on the square's boundary.
int octant_of(const Scalar& x, const Scalar& y);
int octant_of(double x, double y);
// Gradient (d/dx, d/dy) of f on the open octant, read off from exact
// evaluations of the case formulas.
std::array<int, 2> base_gradient(BaseFn f, int octant);

// x_k = 2 - 2^(1-k), x_0 = 0
Scalar column_edge(int k);

enum class SquareKind { Even, Odd, Diagonal };

struct PyramidSquare {
  int k = 1;
  std::int64_t i = 0;
  SquareKind kind = SquareKind::Diagonal;
  Scalar x0, x1, y0, y1;

  Point center() const { return {Scalar::pow2(-1) * (x0 + x1), Scalar::pow2(-1) * (y0 + y1)}; }
  Scalar half_side() const { return Scalar::pow2(-k); }
  BaseFn second() const;
};

SquareKind square_kind(int k, std::int64_t i);

// The squares Q_{k,i}, k = 1..depth, i = 0..2^k-2, filling the triangle
// 0 <= y <= x <= 2 up to the strip x > x_depth.
class PyramidLayout {
 public:
  explicit PyramidLayout(int depth);
  int depth() const { return depth_; }
  const std::vector<PyramidSquare>& squares() const { return squares_; }
  static PyramidSquare square(int k, std::int64_t i);

 private:
  int depth_;
  std::vector<PyramidSquare> squares_;
};

// Gradient of the pyramid on the octants of a square of the given kind, as
// seen inside the triangle 0 <= y <= x. For Diagonal squares only octants
// 0, 5, 6, 7 lie in the triangle; the other four entries are what the b
// profile would give there.
std::array<SignedMatrix, 8> gradient_table(SquareKind kind);

struct PvValue {
  enum Status { Regular, SingularLine, Untiled };
  Status status = Regular;
  Point value;
  std::optional<SignedMatrix> gradient;
  int k = 0;
  std::int64_t i = 0;
};

// Dihedral symmetry sending the reduced point t (0 <= t.y <= t.x) back to p.
Mat2i reduction_of(const Point& p);

// Evaluates the pyramid on (-2,2)^2 truncated at the given depth.
// Throws std::domain_error outside the open square.
PvValue pv_eval(const Point& p, int depth);

// Exact cell decomposition: every square split along its diagonals and
// midlines, reflected by the eight symmetries. Ordered by k, i, octant,
// symmetry.
PiecewiseAffineMap pv_cells(int depth);

// The eight dihedral maps in the order used by pv_cells.
std::array<Mat2i, 8> dihedral_group();

struct ScalarPyramid {
  std::vector<std::vector<double>> xis;
  double r = 1.0;
  std::vector<double> x0;

  double operator()(const std::vector<double>& x) const;
  // index of the active xi; the gradient there is -xi
  std::size_t active(const std::vector<double>& x) const;
  bool in_polytope(const std::vector<double>& x, double tol = 0.0) const;
};

// p(x) = r - max_i <xi_i, x - x0>. Throws std::invalid_argument with
// "unbounded pyramid" when 0 is not in the convex hull of the xi.
ScalarPyramid scalar_pyramid(std::vector<std::vector<double>> xis, double r, std::vector<double> x0);
bool zero_in_hull(const std::vector<std::vector<double>>& pts, double tol = 1e-12);

}  // namespace vpyr
