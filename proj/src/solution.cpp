#include "vpyr/solution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "vpyr/pyramid.hpp"

namespace vpyr {

Mat2i quarter_turn(int k) {
  Mat2i R = kIdentity;
  const Mat2i q{{0, -1, 1, 0}};
  for (int i = 0; i < ((k % 4) + 4) % 4; ++i) R = q * R;
  return R;
}

const PiecewiseAffineMap& pyramid_template(int depth) {
  static std::mutex mu;
  static std::map<int, PiecewiseAffineMap> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(depth);
  if (it == cache.end()) it = cache.emplace(depth, pv_cells(depth)).first;
  return it->second;
}

std::size_t Solution::square_of_cell(std::size_t cell) const {
  auto it = std::upper_bound(cell_begin.begin(), cell_begin.end(), cell);
  return static_cast<std::size_t>(it - cell_begin.begin()) - 1;
}

Solution build_solution(const Covering& cov, int depth) {
  if (cov.squares.empty()) throw std::invalid_argument("empty covering");
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  const PiecewiseAffineMap& tpl = pyramid_template(depth);
  Solution sol;
  sol.covering = cov;
  sol.depth = depth;
  sol.map.depth = depth;
  sol.map.domain = cov.parts;
  sol.map.cells.reserve(tpl.cells.size() * cov.squares.size());
  std::vector<Segment> sig;
  for (const auto& q : cov.squares) {
    sol.cell_begin.push_back(sol.map.cells.size());
    Mat2i R = quarter_turn(q.rotation), Rt = R.transpose();
    Scalar scale = q.side.ldexp(-2);
    auto place = [&](const Point& v) { return q.center + scale * R.apply(v); };
    for (const auto& c : tpl.cells) {
      ConvexCell cell;
      cell.gradient = c.gradient * Rt;
      cell.vertices.reserve(c.vertices.size());
      for (const auto& v : c.vertices) cell.vertices.push_back(place(v));
      cell.offset = scale * c.offset - cell.gradient.apply(q.center);
      sol.map.cells.push_back(std::move(cell));
    }
    for (const auto& u : tpl.untiled) {
      Polygon p;
      for (const auto& v : u) p.push_back(place(v));
      sol.map.untiled.push_back(std::move(p));
    }
    auto poly = to_vec(q.polygon());
    for (std::size_t k = 0; k < 4; ++k) sig.push_back({poly[k], poly[(k + 1) % 4]});
  }
  sol.cell_begin.push_back(sol.map.cells.size());
  sol.boundary = domain_boundary(cov.parts);
  for (const auto& s : sol.boundary.segments()) sig.push_back(s);
  sol.sigma = SegmentSet(std::move(sig));
  return sol;
}

// ---------------------------------------------------------------- verification

bool VerifyReport::ok() const {
  if (!bad_cells.empty() || samples_in_E != samples || fd_max_error > 1e-5) return false;
  if (continuity.shared_edges > 0 && continuity.max_defect.value() > (continuity_exact ? 0.0 : 1e-10)) return false;
  if (continuity.overlaps > 0) return false;
  if (boundary_sup_ratio > 1.0 || trace_ratio > 1.0) return false;
  for (const auto& c : h1)
    if (c.checked && !c.connected) return false;
  return true;
}

namespace {

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

std::optional<std::vector<Vec2>> inner_parallel_convex(const std::vector<Polygon>& parts, double delta) {
  std::vector<Vec2> pts;
  double area = 0.0;
  for (const auto& p : parts) {
    for (const auto& v : p) pts.push_back(v.v());
    area += std::abs(signed_area(p).value());
  }
  auto hull = convex_hull(pts);
  if (hull.size() < 3) return std::nullopt;
  double hull_area = polygon_area(hull);
  if (std::abs(hull_area - area) > 1e-9 * std::max(1.0, area)) return std::nullopt;
  std::vector<Vec2> inner = hull;
  for (std::size_t i = 0; i < hull.size() && !inner.empty(); ++i) {
    Vec2 a = hull[i], d = hull[(i + 1) % hull.size()] - a;
    Vec2 n = (1.0 / norm(d)) * Vec2{-d.y, d.x};
    inner = clip_halfplane(inner, a + delta * n, n);
  }
  return inner;
}

VerifyReport verify_solution(const Solution& sol, std::size_t samples, const std::vector<double>& deltas,
                             std::uint64_t seed, int threads) {
  VerifyReport rep;
  const auto& cells = sol.map.cells;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!SignedMatrix::from_matrix(cells[i].gradient)) rep.bad_cells.push_back(i);

  // sampled inclusion and finite differences
  CellIndex index(cells);
  struct Sample {
    std::size_t cell;
    Vec2 p;
  };
  std::vector<Sample> pts;
  if (!cells.empty()) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    std::uniform_real_distribution<double> w(0.1, 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
      std::size_t c = pick(rng);
      const auto& v = cells[c].vertices;
      std::uniform_int_distribution<std::size_t> fan(1, v.size() - 2);
      std::size_t f = fan(rng);
      double w0 = w(rng), w1 = w(rng), w2 = w(rng), tot = w0 + w1 + w2;
      Vec2 p = (w0 / tot) * v[0].v() + (w1 / tot) * v[f].v() + (w2 / tot) * v[f + 1].v();
      pts.push_back({c, p});
    }
  }
  int nt = std::max(1, threads);
  std::vector<double> fd_err(nt, 0.0);
  std::vector<std::size_t> in_e(nt, 0);
  auto work = [&](int t) {
    const double h = 1e-7;
    for (std::size_t s = t; s < pts.size(); s += nt) {
      const auto& smp = pts[s];
      const Mat2i& G = cells[smp.cell].gradient;
      if (SignedMatrix::from_matrix(G)) ++in_e[t];
      for (int i = 0; i < 2; ++i) {
        Vec2 e = i == 0 ? Vec2{h, 0} : Vec2{0, h};
        auto cp = index.locate(smp.p + e, 0.0), cm = index.locate(smp.p - e, 0.0);
        if (!cp || !cm) {
          fd_err[t] = INFINITY;
          continue;
        }
        Vec2 up = cells[*cp].value(smp.p + e), um = cells[*cm].value(smp.p - e);
        Vec2 dq = (0.5 / h) * (up - um);
        fd_err[t] = std::max({fd_err[t], std::abs(dq.x - G(0, i)), std::abs(dq.y - G(1, i))});
      }
    }
  };
  if (nt == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  rep.samples = pts.size();
  for (int t = 0; t < nt; ++t) {
    rep.samples_in_E += in_e[t];
    rep.fd_max_error = std::max(rep.fd_max_error, fd_err[t]);
  }
  rep.inclusion_fraction = rep.samples ? static_cast<double>(rep.samples_in_E) / rep.samples : 1.0;

  bool exact = sol.map.exact();
  auto arr = build_arrangement(cells, exact ? 0.0 : 1e-12);
  rep.continuity = check_continuity(cells, arr);
  rep.continuity_exact = exact && rep.continuity.max_defect.exact();

  // squares touching the boundary
  double scale = 0.0;
  for (const auto& s : sol.boundary.segments()) scale = std::max({scale, std::abs(s.a.x), std::abs(s.a.y)});
  double touch = 1e-12 * std::max(1.0, scale);
  for (std::size_t q = 0; q < sol.covering.squares.size(); ++q) {
    const auto& sq = sol.covering.squares[q];
    auto poly = to_vec(sq.polygon());
    bool touches = false;
    for (std::size_t k = 0; k < 4 && !touches; ++k) {
      Vec2 a = poly[k], b = poly[(k + 1) % 4];
      for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
        if (sol.boundary.distance(a + t * (b - a)) <= touch) touches = true;
    }
    if (!touches) continue;
    double sup = 0.0;
    for (std::size_t c = sol.cell_begin[q]; c < sol.cell_begin[q + 1]; ++c)
      for (const auto& v : cells[c].vertices) sup = std::max(sup, norm(cells[c].value(v.v())));
    rep.boundary_sup_ratio = std::max(rep.boundary_sup_ratio, sup / (0.5 * sq.side.value()));
  }
  for (const auto& c : cells)
    for (const auto& v : c.vertices) {
      Vec2 p = v.v();
      double d = sol.boundary.distance(p), u = norm(c.value(p));
      if (d > 0) rep.trace_ratio = std::max(rep.trace_ratio, u / (2 * d));
      else if (u > 0) rep.trace_ratio = INFINITY;
    }

  for (double delta : deltas) {
    ConnectivityCheck cc;
    cc.delta = delta;
    auto inner = inner_parallel_convex(sol.covering.parts, delta);
    if (inner && inner->size() >= 3) {
      cc.checked = true;
      std::vector<Segment> segs;
      for (const auto& s : sol.sigma.segments())
        if (auto piece = clip_segment(s, *inner)) {
          segs.push_back(*piece);
          cc.sigma_length += piece->length();
        }
      for (std::size_t i = 0; i < inner->size(); ++i) segs.push_back({(*inner)[i], (*inner)[(i + 1) % inner->size()]});
      SegmentSet set(std::move(segs));
      cc.components = set.components(1e-9);
      cc.connected = cc.components == 1;
      for (const auto& q : sol.covering.squares) {
        auto c = clip_convex(to_vec(q.polygon()), *inner);
        if (c.size() >= 3 && polygon_area(c) > 0) ++cc.squares_meeting;
      }
    }
    rep.h1.push_back(cc);
  }
  return rep;
}

// ---------------------------------------------------------------- density

std::vector<DensityAtRadius> density_profile(const Solution& sol, Vec2 x, const std::vector<double>& radii, double c) {
  CellIndex index(sol.map.cells);
  std::vector<DensityAtRadius> out;
  for (double r : radii) {
    for (const auto& q : sol.covering.squares) {
      double side = q.side.value();
      Vec2 cen = q.center.v();
      double dx = std::max(0.0, std::abs(x.x - cen.x) - 0.5 * side);
      double dy = std::max(0.0, std::abs(x.y - cen.y) - 0.5 * side);
      if (std::hypot(dx, dy) >= r) continue;
      double frame = std::ldexp(side, -(sol.depth + 1));
      // the disk stays clear of the untiled frame along the square boundary
      double cheb = std::max(std::abs(x.x - cen.x), std::abs(x.y - cen.y));
      if (cheb + r < 0.5 * side - frame) continue;
      if (frame > r / 8) throw std::runtime_error("insufficient depth");
    }
    DensityAtRadius d;
    d.r = r;
    for (auto id : index.query({x.x - r, x.y - r, x.x + r, x.y + r})) {
      const auto& cell = sol.map.cells[id];
      auto label = SignedMatrix::from_matrix(cell.gradient);
      if (!label) continue;
      d.area[label->index()] += disk_polygon_area(x, r, cell);
    }
    for (double a : d.area) d.labels_clearing += a > c * r * r;
    out.push_back(d);
  }
  return out;
}

std::array<Scalar, 8> label_areas(const std::vector<ConvexCell>& cells, const std::vector<Polygon>& regions) {
  std::array<Scalar, 8> out{};
  std::vector<Box> boxes;
  for (const auto& r : regions) boxes.push_back(bounding_box(to_vec(r)));
  for (const auto& c : cells) {
    auto label = SignedMatrix::from_matrix(c.gradient);
    if (!label) continue;
    Box cb = bounding_box(to_vec(c.vertices));
    for (std::size_t k = 0; k < regions.size(); ++k) {
      if (!cb.overlaps(boxes[k])) continue;
      Polygon piece = clip_convex(c.vertices, regions[k]);
      if (piece.size() >= 3) out[label->index()] += signed_area(piece);
    }
  }
  return out;
}

// ---------------------------------------------------------------- export

namespace {

void write_poly(std::ostringstream& os, const Polygon& p) {
  os << p.size();
  for (const auto& v : p) os << ' ' << v.x.str() << ' ' << v.y.str();
  os << '\n';
}

Scalar read_scalar(std::istringstream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::invalid_argument("truncated cell file");
  auto s = Scalar::parse(tok);
  if (!s) throw std::invalid_argument("bad number in cell file: " + tok);
  return *s;
}

Polygon read_poly(std::istringstream& is) {
  std::size_t n = 0;
  if (!(is >> n) || n > 1000) throw std::invalid_argument("bad polygon in cell file");
  Polygon p;
  for (std::size_t i = 0; i < n; ++i) {
    Scalar x = read_scalar(is);
    p.push_back({x, read_scalar(is)});
  }
  return p;
}

}  // namespace

std::string export_cells(const PiecewiseAffineMap& map) {
  std::ostringstream os;
  os << "vpyr-cells 1\n";
  os << "depth " << map.depth << '\n';
  os << "domain " << map.domain.size() << '\n';
  for (const auto& p : map.domain) write_poly(os, p);
  os << "untiled " << map.untiled.size() << '\n';
  for (const auto& p : map.untiled) write_poly(os, p);
  os << "cells " << map.cells.size() << '\n';
  for (const auto& c : map.cells) {
    auto label = SignedMatrix::from_matrix(c.gradient);
    if (!label) throw std::logic_error("cell gradient outside E");
    os << label->name() << ' ' << c.offset.x.str() << ' ' << c.offset.y.str() << ' ';
    write_poly(os, c.vertices);
  }
  return os.str();
}

PiecewiseAffineMap import_cells(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "vpyr-cells" || version != 1) throw std::invalid_argument("not a cell file");
  PiecewiseAffineMap map;
  std::size_t n = 0;
  if (!(is >> tag >> map.depth) || tag != "depth") throw std::invalid_argument("cell file: missing depth");
  if (!(is >> tag >> n) || tag != "domain") throw std::invalid_argument("cell file: missing domain");
  for (std::size_t i = 0; i < n; ++i) map.domain.push_back(read_poly(is));
  if (!(is >> tag >> n) || tag != "untiled") throw std::invalid_argument("cell file: missing untiled");
  for (std::size_t i = 0; i < n; ++i) map.untiled.push_back(read_poly(is));
  if (!(is >> tag >> n) || tag != "cells") throw std::invalid_argument("cell file: missing cells");
  map.cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    is >> name;
    auto label = SignedMatrix::from_name(name);
    if (!label) throw std::invalid_argument("bad label in cell file: " + name);
    ConvexCell c;
    c.gradient = label->matrix();
    Scalar ox = read_scalar(is);
    c.offset = {ox, read_scalar(is)};
    c.vertices = read_poly(is);
    map.cells.push_back(std::move(c));
  }
  return map;
}

// ---------------------------------------------------------------- accordion

AccordionSpec harmonic_accordion(int frames) { return {[](int j) { return 1.0 / j; }, frames}; }

AccordionSpec shifted_accordion(double s_inf, int frames) {
  return {[s_inf](int j) { return s_inf + (1.0 - s_inf) / j; }, frames};
}

AccordionSpec geometric_accordion(double q, int frames) {
  return {[q](int j) { return std::pow(q, j - 1); }, frames};
}

namespace {

const Vec2 kRay[8] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
const Label kInner[8] = {Label::PlusA4,  Label::PlusA3,  Label::PlusA1,  Label::MinusA2,
                         Label::MinusA4, Label::MinusA3, Label::MinusA1, Label::PlusA2};
const Label kOuter[8] = {Label::MinusA2, Label::MinusA1, Label::MinusA3, Label::PlusA4,
                         Label::PlusA2,  Label::PlusA1,  Label::PlusA3,  Label::MinusA4};

}  // namespace

PiecewiseAffineMap build_accordion(const AccordionSpec& spec) {
  if (spec.frames < 1) throw std::invalid_argument("accordion needs at least one frame");
  int jmax = 2 * spec.frames + 1;
  std::vector<double> s(jmax + 2);
  for (int j = 1; j <= jmax + 1; ++j) s[j] = spec.s(j);
  if (s[1] != 1.0) throw std::invalid_argument("accordion sequence must start at 1");
  for (int j = 1; j <= jmax; ++j)
    if (!(s[j + 1] < s[j]) || !(s[j + 1] > 0)) throw std::invalid_argument("accordion sequence must decrease strictly");
  auto S = [&](int j) { return Scalar::from_double(s[j]); };
  auto ring = [](Scalar r0, Scalar r1, int o) {
    Point a = Point::from(kRay[o]), b = Point::from(kRay[(o + 1) % 8]);
    return Polygon{r0 * a, r1 * a, r1 * b, r0 * b};
  };

  PiecewiseAffineMap map;
  map.depth = spec.frames;
  Scalar beta = Scalar(2) - Scalar(2) * S(2);
  for (int n = 1; n <= spec.frames; ++n) {
    Scalar sn = S(2 * n + 1), tn = S(2 * n), ln = S(2 * n - 1);
    for (int o = 0; o < 8; ++o) {
      map.cells.push_back({ring(sn, tn, o), SignedMatrix(kInner[o]).matrix(), {Scalar(0), beta}});
      map.cells.push_back({ring(tn, ln, o), SignedMatrix(kOuter[o]).matrix(), {Scalar(0), Scalar(2) * tn + beta}});
    }
    beta = beta + Scalar(2) * S(2 * n + 1) - Scalar(2) * S(2 * n + 2);
  }
  Scalar inner = S(jmax);
  for (int o = 0; o < 8; ++o) map.domain.push_back(ring(inner, Scalar(1), o));
  map.untiled.push_back({{-inner, -inner}, {inner, -inner}, {inner, inner}, {-inner, inner}});
  return map;
}

std::optional<Vec2> evaluate(const PiecewiseAffineMap& map, const CellIndex& index, Vec2 p, double tol) {
  auto c = index.locate(p, tol);
  if (!c) return std::nullopt;
  return map.cells[*c].value(p);
}

double accordion_axis_even(const std::function<double(int)>& s, int n) {
  double sum = 0.0;
  for (int k = 1; k <= 2 * n - 1; ++k) sum += (k % 2 ? 1.0 : -1.0) * s(k);
  return -s(2 * n) + 2 * sum;
}

double accordion_axis_odd(const std::function<double(int)>& s, int n) {
  double sum = 0.0;
  for (int k = 1; k <= 2 * n; ++k) sum += (k % 2 ? 1.0 : -1.0) * s(k);
  return s(2 * n + 1) + 2 * sum;
}

double jump_length(const std::vector<ConvexCell>& cells, double tol) {
  auto arr = build_arrangement(cells, tol);
  double total = 0.0;
  for (const auto& f : arr.interfaces)
    if (f.shared() && !(cells[f.pos].gradient == cells[f.neg].gradient)) total += norm(f.b.v() - f.a.v());
  return total;
}

}  // namespace vpyr
