#include "vpyr/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vpyr {

double base_a(double x, double y) { return std::min({1 + x, 1 - x, 1 + y, 1 - y}); }

double base_b(double x, double y) { return std::max(1 - std::abs(x), 1 - std::abs(y)); }

double base_c(double x, double y) {
  if (std::abs(x) <= y) return 1 - std::abs(x);
  if (std::abs(y) <= -x) return 1 - y;
  if (std::abs(x) <= -y) return 1 - x;
  return 1 - std::abs(y);
}

double base_d(double x, double y) {
  if (std::abs(x) <= y) return 1 - x;
  if (std::abs(y) <= -x) return 1 + y;
  if (std::abs(x) <= -y) return 1 - std::abs(x);
  return 1 - std::abs(y);
}

double base_value(BaseFn f, double x, double y) {
  switch (f) {
    case BaseFn::A: return base_a(x, y);
    case BaseFn::B: return base_b(x, y);
    case BaseFn::C: return base_c(x, y);
    case BaseFn::D: return base_d(x, y);
  }
  return 0.0;
}

Scalar base_value(BaseFn f, const Scalar& x, const Scalar& y) {
  const Scalar one(1);
  Scalar ax = x.abs(), ay = y.abs();
  if (f == BaseFn::A) return min(min(one + x, one - x), min(one + y, one - y));
  if (f == BaseFn::B) return max(one - ax, one - ay);

  // the four sectors in listed order: top, left, bottom, right
  bool cond[4] = {ax <= y, ay <= -x, ax <= -y, ay <= x};
  Scalar val[4];
  if (f == BaseFn::C) {
    val[0] = one - ax;
    val[1] = one - y;
    val[2] = one - x;
    val[3] = one - ay;
  } else {
    val[0] = one - x;
    val[1] = one + y;
    val[2] = one - ax;
    val[3] = one - ay;
  }
  int first = -1;
  for (int c = 0; c < 4; ++c) {
    if (!cond[c]) continue;
    if (first < 0) {
      first = c;
    } else if (!(val[c] == val[first]) &&
               !(!val[c].exact() && std::abs(val[c].value() - val[first].value()) <= 1e-12)) {
      throw std::logic_error("base profile cases disagree at (" + x.str() + ", " + y.str() + ")");
    }
  }
  return val[first];
}

double rescale(BaseFn f, int k, double x, double y) {
  return std::ldexp(base_value(f, std::ldexp(x, k), std::ldexp(y, k)), -k);
}

int octant_of(const Scalar& x, const Scalar& y) {
  Scalar ax = x.abs(), ay = y.abs();
  if (x.is_zero() || y.is_zero() || ax == ay || !(ax < Scalar(1)) || !(ay < Scalar(1))) return -1;
  bool xpos = x.sign() > 0, ypos = y.sign() > 0;
  if (ax > ay) return xpos ? (ypos ? 0 : 7) : (ypos ? 3 : 4);
  return ypos ? (xpos ? 1 : 2) : (xpos ? 6 : 5);
}

int octant_of(double x, double y) { return octant_of(Scalar::from_double(x), Scalar::from_double(y)); }

namespace {

// an interior point of each octant, with room for a step of 1/16
Point octant_probe(int o) {
  static const int px[8] = {8, 4, -4, -8, -8, -4, 4, 8};
  static const int py[8] = {4, 8, 8, 4, -4, -8, -8, -4};
  return {Scalar::dyadic(px[o], -4), Scalar::dyadic(py[o], -4)};
}

// value at the octant's apex (the square centre) of the affine piece
Scalar base_constant(BaseFn f, int o) {
  Point p = octant_probe(o);
  auto g = base_gradient(f, o);
  return base_value(f, p.x, p.y) - Scalar(g[0]) * p.x - Scalar(g[1]) * p.y;
}

const Point kOctantCorner[8] = {
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1},
};

Mat2i piece_gradient(BaseFn second, int o) {
  auto ga = base_gradient(BaseFn::A, o);
  auto gf = base_gradient(second, o);
  return {{ga[0], ga[1], gf[0], gf[1]}};
}

}  // namespace

std::array<int, 2> base_gradient(BaseFn f, int octant) {
  Point p = octant_probe(octant);
  Scalar h = Scalar::pow2(-4);
  Scalar v = base_value(f, p.x, p.y);
  Scalar gx = (base_value(f, p.x + h, p.y) - v) / h;
  Scalar gy = (base_value(f, p.x, p.y + h) - v) / h;
  return {static_cast<int>(gx.value()), static_cast<int>(gy.value())};
}

Scalar column_edge(int k) {
  if (k <= 0) return Scalar(0);
  return Scalar(2) - Scalar::pow2(1 - k);
}

SquareKind square_kind(int k, std::int64_t i) {
  if (i == (std::int64_t{1} << k) - 2) return SquareKind::Diagonal;
  return i % 2 == 0 ? SquareKind::Even : SquareKind::Odd;
}

BaseFn PyramidSquare::second() const {
  switch (kind) {
    case SquareKind::Even: return BaseFn::D;
    case SquareKind::Odd: return BaseFn::C;
    case SquareKind::Diagonal: return BaseFn::B;
  }
  return BaseFn::B;
}

PyramidSquare PyramidLayout::square(int k, std::int64_t i) {
  PyramidSquare q;
  q.k = k;
  q.i = i;
  q.kind = square_kind(k, i);
  q.x0 = column_edge(k - 1);
  q.x1 = column_edge(k);
  q.y0 = Scalar::dyadic(i, 1 - k);
  q.y1 = Scalar::dyadic(i + 1, 1 - k);
  return q;
}

PyramidLayout::PyramidLayout(int depth) : depth_(depth) {
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  for (int k = 1; k <= depth; ++k)
    for (std::int64_t i = 0; i <= (std::int64_t{1} << k) - 2; ++i) squares_.push_back(square(k, i));
}

std::array<SignedMatrix, 8> gradient_table(SquareKind kind) {
  PyramidSquare q;
  q.kind = kind;
  std::array<SignedMatrix, 8> out;
  for (int o = 0; o < 8; ++o) {
    auto m = SignedMatrix::from_matrix(piece_gradient(q.second(), o));
    if (!m) throw std::logic_error("pyramid gradient outside E");
    out[o] = *m;
  }
  return out;
}

std::array<Mat2i, 8> dihedral_group() {
  std::array<Mat2i, 8> out;
  int n = 0;
  for (int s = 0; s < 2; ++s)
    for (int sy : {1, -1})
      for (int sx : {1, -1}) {
        Mat2i d{{sx, 0, 0, sy}};
        Mat2i p = s ? Mat2i{{0, 1, 1, 0}} : kIdentity;
        out[n++] = d * p;
      }
  return out;
}

Mat2i reduction_of(const Point& p) {
  int sx = p.x.sign() < 0 ? -1 : 1;
  int sy = p.y.sign() < 0 ? -1 : 1;
  bool swap = p.y.abs() > p.x.abs();
  Mat2i d{{sx, 0, 0, sy}};
  return swap ? d * Mat2i{{0, 1, 1, 0}} : d;
}

PvValue pv_eval(const Point& p, int depth) {
  const Scalar two(2);
  if (!(p.x.abs() < two) || !(p.y.abs() < two)) throw std::domain_error("point outside domain");
  Mat2i R = reduction_of(p);
  Point t = R.transpose().apply(p);

  PvValue out;
  int k = 1;
  while (k <= depth && !(t.x < column_edge(k))) ++k;
  bool on_outer_edge = false;
  if (k > depth) {
    if (t.x > column_edge(depth)) {
      out.status = PvValue::Untiled;
      return out;
    }
    k = depth;
    on_outer_edge = true;
  }
  std::int64_t top = (std::int64_t{1} << k) - 2;
  auto i = static_cast<std::int64_t>(std::floor(std::ldexp(t.y.value(), k - 1)));
  i = std::clamp<std::int64_t>(i, 0, top);
  PyramidSquare q = PyramidLayout::square(k, i);
  Point c = q.center();
  Point xi{(t.x - c.x).ldexp(k), (t.y - c.y).ldexp(k)};

  out.k = k;
  out.i = i;
  out.value = {base_value(BaseFn::A, xi.x, xi.y).ldexp(-k), base_value(q.second(), xi.x, xi.y).ldexp(-k)};
  int o = octant_of(xi.x, xi.y);
  if (o < 0 || on_outer_edge) {
    out.status = PvValue::SingularLine;
    return out;
  }
  out.gradient = SignedMatrix::from_matrix(piece_gradient(q.second(), o) * R.transpose());
  return out;
}

PiecewiseAffineMap pv_cells(int depth) {
  PyramidLayout layout(depth);
  auto group = dihedral_group();
  PiecewiseAffineMap map;
  map.depth = depth;
  const Scalar two(2);
  map.domain.push_back({{-two, -two}, {two, -two}, {two, two}, {-two, two}});
  Scalar e = column_edge(depth);
  map.untiled = {
      {{-two, e}, {two, e}, {two, two}, {-two, two}},
      {{-two, -two}, {two, -two}, {two, -e}, {-two, -e}},
      {{-two, -e}, {-e, -e}, {-e, e}, {-two, e}},
      {{e, -e}, {two, -e}, {two, e}, {e, e}},
  };

  static const int diag_octants[] = {0, 5, 6, 7};
  static const int all_octants[] = {0, 1, 2, 3, 4, 5, 6, 7};
  for (const auto& q : layout.squares()) {
    bool diag = q.kind == SquareKind::Diagonal;
    const int* octs = diag ? diag_octants : all_octants;
    int nocts = diag ? 4 : 8;
    Point c = q.center();
    Scalar h = q.half_side();
    for (int n = 0; n < nocts; ++n) {
      int o = octs[n];
      Mat2i G = piece_gradient(q.second(), o);
      // u_j(t) = 2^-k (c_j + g_j . 2^k (t - c)) = g_j . t + (2^-k c_j - g_j . c)
      Scalar c1 = base_constant(BaseFn::A, o).ldexp(-q.k);
      Scalar c2 = base_constant(q.second(), o).ldexp(-q.k);
      Point off{c1 - Scalar(G.e[0]) * c.x - Scalar(G.e[1]) * c.y, c2 - Scalar(G.e[2]) * c.x - Scalar(G.e[3]) * c.y};
      Polygon tri = {c, c + h * kOctantCorner[o], c + h * kOctantCorner[(o + 1) % 8]};
      for (const Mat2i& R : group) {
        ConvexCell cell;
        cell.gradient = G * R.transpose();
        cell.offset = off;
        for (const auto& v : tri) cell.vertices.push_back(R.apply(v));
        if (R.det() < 0) std::reverse(cell.vertices.begin(), cell.vertices.end());
        map.cells.push_back(std::move(cell));
      }
    }
  }
  return map;
}

double ScalarPyramid::operator()(const std::vector<double>& x) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& xi : xis) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) s += xi[d] * (x[d] - x0[d]);
    m = std::max(m, s);
  }
  return r - m;
}

std::size_t ScalarPyramid::active(const std::vector<double>& x) const {
  std::size_t best = 0;
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xis.size(); ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) s += xis[i][d] * (x[d] - x0[d]);
    if (s > m) m = s, best = i;
  }
  return best;
}

bool ScalarPyramid::in_polytope(const std::vector<double>& x, double tol) const { return (*this)(x) >= -tol; }

bool zero_in_hull(const std::vector<std::vector<double>>& pts, double tol) {
  // Phase one of the simplex method on  sum l_i p_i = 0, sum l_i = 1, l >= 0.
  std::size_t n = pts.size();
  if (n == 0) return false;
  std::size_t dim = pts[0].size();
  std::size_t m = dim + 1;
  std::size_t cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) T[r][j] = r < dim ? pts[j][r] : 1.0;
    T[r][cols - 1] = r < dim ? 0.0 : 1.0;
    if (T[r][cols - 1] < 0)
      for (auto& v : T[r]) v = -v;
    T[r][n + r] = 1.0;
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;
  // objective: minimise the sum of artificials, written in reduced form
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j < cols; ++j)
      if (j < n || j == cols - 1) T[m][j] -= T[r][j];
  for (int iter = 0; iter < 10000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j)
      if (T[m][j] < -tol) {
        enter = j;
        break;
      }
    if (enter == cols) break;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r)
      if (T[r][enter] > tol) {
        double ratio = T[r][cols - 1] / T[r][enter];
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    if (leave == m) break;
    double piv = T[leave][enter];
    for (auto& v : T[leave]) v /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave || T[r][enter] == 0.0) continue;
      double f = T[r][enter];
      for (std::size_t j = 0; j < cols; ++j) T[r][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
  }
  return -T[m][cols - 1] <= 1e-12;
}

ScalarPyramid scalar_pyramid(std::vector<std::vector<double>> xis, double r, std::vector<double> x0) {
  if (xis.empty()) throw std::invalid_argument("unbounded pyramid");
  for (const auto& xi : xis)
    if (xi.size() != x0.size()) throw std::invalid_argument("dimension mismatch");
  if (!(r > 0)) throw std::invalid_argument("pyramid height must be positive");
  // P is bounded iff 0 is interior to the hull, i.e. small moves of the
  // origin along every axis stay inside it
  double scale = 0.0;
  for (const auto& xi : xis)
    for (double v : xi) scale = std::max(scale, std::abs(v));
  double delta = 1e-6 * scale;
  for (std::size_t d = 0; d < x0.size(); ++d)
    for (double s : {delta, -delta}) {
      auto shifted = xis;
      for (auto& xi : shifted) xi[d] -= s;
      if (!zero_in_hull(shifted)) throw std::invalid_argument("unbounded pyramid");
    }
  return {std::move(xis), r, std::move(x0)};
}

}  // namespace vpyr
