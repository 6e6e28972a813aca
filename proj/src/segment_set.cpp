#include "vpyr/segment_set.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "vpyr/quadrature.hpp"

namespace vpyr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int orient(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  return (v > 0) - (v < 0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Segment& s, const Segment& t) {
  int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
  int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

// Liang-Barsky test of a segment against a closed box.
bool segment_meets_box(const Segment& s, const Box& b) {
  double t0 = 0.0, t1 = 1.0;
  Vec2 d = s.b - s.a;
  double p[4] = {-d.x, d.x, -d.y, d.y};
  double q[4] = {s.a.x - b.x0, b.x1 - s.a.x, s.a.y - b.y0, b.y1 - s.a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0) {
      if (q[i] < 0) return false;
      continue;
    }
    double r = q[i] / p[i];
    if (p[i] < 0) t0 = std::max(t0, r);
    else t1 = std::min(t1, r);
    if (t0 > t1) return false;
  }
  return true;
}

double box_distance(const Box& b, Vec2 p) {
  double dx = std::max({b.x0 - p.x, 0.0, p.x - b.x1});
  double dy = std::max({b.y0 - p.y, 0.0, p.y - b.y1});
  return std::hypot(dx, dy);
}

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t.a, t.b), point_segment_distance(s.b, t.a, t.b),
                   point_segment_distance(t.a, s.a, s.b), point_segment_distance(t.b, s.a, s.b)});
}

SegmentSet::SegmentSet(std::vector<Segment> segments, double tol) : segs_(std::move(segments)) {
  normalize(tol);
}

double SegmentSet::length() const {
  double s = 0.0;
  for (const auto& seg : segs_) s += seg.length();
  return s;
}

void SegmentSet::normalize(double tol) {
  if (segs_.empty()) return;
  double extent = 0.0;
  for (const auto& s : segs_)
    extent = std::max({extent, std::abs(s.a.x), std::abs(s.a.y), std::abs(s.b.x), std::abs(s.b.y)});
  double atol = tol * std::max(1.0, extent);

  struct Line {
    double theta, offset, t0, t1;
    Vec2 p0, p1;
  };
  std::vector<Line> lines;
  std::vector<Vec2> points;
  for (auto s : segs_) {
    Vec2 d = s.b - s.a;
    double len = norm(d);
    if (len <= atol) {
      points.push_back(s.a);
      continue;
    }
    if (d.x < 0 || (d.x == 0 && d.y < 0)) {
      std::swap(s.a, s.b);
      d = s.b - s.a;
    }
    Vec2 u = (1.0 / len) * d;
    double theta = std::atan2(d.y, d.x);
    Vec2 n{-u.y, u.x};
    lines.push_back({theta, dot(n, s.a), dot(u, s.a), dot(u, s.b), s.a, s.b});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
    if (x.theta != y.theta) return x.theta < y.theta;
    if (x.offset != y.offset) return x.offset < y.offset;
    return x.t0 < y.t0;
  });

  std::vector<Segment> merged;
  std::size_t i = 0;
  while (i < lines.size()) {
    std::size_t j = i + 1;
    while (j < lines.size() && lines[j].theta - lines[j - 1].theta <= 1e-12 &&
           std::abs(lines[j].offset - lines[j - 1].offset) <= atol)
      ++j;
    // project the group onto the first member's direction
    double th = lines[i].theta;
    Vec2 u{std::cos(th), std::sin(th)};
    std::vector<Line> group(lines.begin() + i, lines.begin() + j);
    for (auto& g : group) {
      g.t0 = dot(u, g.p0);
      g.t1 = dot(u, g.p1);
    }
    std::sort(group.begin(), group.end(), [](const Line& x, const Line& y) { return x.t0 < y.t0; });
    Line cur = group[0];
    for (std::size_t k = 1; k < group.size(); ++k) {
      if (group[k].t0 <= cur.t1 + atol) {
        if (group[k].t1 > cur.t1) {
          cur.t1 = group[k].t1;
          cur.p1 = group[k].p1;
        }
      } else {
        merged.push_back({cur.p0, cur.p1});
        cur = group[k];
      }
    }
    merged.push_back({cur.p0, cur.p1});
    i = j;
  }

  segs_ = merged;
  build_index();

  // crossings and T-junctions
  std::vector<Segment> split;
  for (std::size_t a = 0; a < merged.size(); ++a) {
    const Segment& s = merged[a];
    Box b = bounding_box({s.a, s.b});
    std::vector<std::pair<double, Vec2>> cuts;
    Vec2 d1 = s.b - s.a;
    double len = norm(d1);
    for (auto idx : query(b)) {
      if (idx == a) continue;
      const Segment& t = merged[idx];
      Vec2 d2 = t.b - t.a;
      double den = cross(d1, d2);
      if (std::abs(den) <= 1e-14 * len * norm(d2)) continue;
      double tt = cross(t.a - s.a, d2) / den;
      double ss = cross(t.a - s.a, d1) / den;
      double et = atol / len, es = atol / norm(d2);
      if (tt <= et || tt >= 1 - et || ss < -es || ss > 1 + es) continue;
      Vec2 p = s.at(tt);
      if (std::abs(ss) <= es) p = t.a;
      else if (std::abs(ss - 1) <= es) p = t.b;
      cuts.push_back({tt, p});
    }
    std::sort(cuts.begin(), cuts.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    Vec2 prev = s.a;
    double prev_t = 0.0;
    for (const auto& [t, p] : cuts) {
      if ((t - prev_t) * len <= atol) continue;
      split.push_back({prev, p});
      prev = p;
      prev_t = t;
    }
    split.push_back({prev, s.b});
  }

  // isolated points not already on a segment
  segs_ = split;
  build_index();
  std::sort(points.begin(), points.end(), [](Vec2 p, Vec2 q) { return p.x != q.x ? p.x < q.x : p.y < q.y; });
  std::vector<Vec2> kept;
  for (Vec2 p : points) {
    if (!kept.empty() && norm(kept.back() - p) <= atol) continue;
    if (!segs_.empty() && distance(p) <= atol) continue;
    kept.push_back(p);
  }
  for (Vec2 p : kept) segs_.push_back({p, p});
  build_index();
}

int SegmentSet::cx(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - box_.x0) / cell_)), 0, nx_ - 1);
}
int SegmentSet::cy(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - box_.y0) / cell_)), 0, ny_ - 1);
}

void SegmentSet::build_index() {
  start_.clear();
  items_.clear();
  nx_ = ny_ = 0;
  if (segs_.empty()) return;
  std::vector<Vec2> pts;
  for (const auto& s : segs_) {
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  box_ = bounding_box(pts);
  double w = box_.x1 - box_.x0, h = box_.y1 - box_.y0;
  double ext = std::max(w, h);
  int res = std::clamp(static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(segs_.size())))), 1, 1024);
  cell_ = ext > 0 ? ext / res : 1.0;
  nx_ = static_cast<int>(std::floor(w / cell_)) + 1;
  ny_ = static_cast<int>(std::floor(h / cell_)) + 1;

  std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(nx_) * ny_);
  for (std::uint32_t k = 0; k < segs_.size(); ++k) {
    const Segment& s = segs_[k];
    int i0 = cx(std::min(s.a.x, s.b.x)), i1 = cx(std::max(s.a.x, s.b.x));
    int j0 = cy(std::min(s.a.y, s.b.y)), j1 = cy(std::max(s.a.y, s.b.y));
    bool axis = s.a.x == s.b.x || s.a.y == s.b.y;
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) {
        if (!axis) {
          Box cb{box_.x0 + i * cell_, box_.y0 + j * cell_, box_.x0 + (i + 1) * cell_, box_.y0 + (j + 1) * cell_};
          double pad = 1e-9 * cell_;
          cb = {cb.x0 - pad, cb.y0 - pad, cb.x1 + pad, cb.y1 + pad};
          if (!segment_meets_box(s, cb)) continue;
        }
        buckets[static_cast<std::size_t>(i) * ny_ + j].push_back(k);
      }
  }
  start_.assign(buckets.size() + 1, 0);
  for (std::size_t c = 0; c < buckets.size(); ++c) start_[c + 1] = start_[c] + buckets[c].size();
  items_.reserve(start_.back());
  for (const auto& b : buckets) items_.insert(items_.end(), b.begin(), b.end());
}

std::vector<std::uint32_t> SegmentSet::query(const Box& box) const {
  std::vector<std::uint32_t> out;
  if (segs_.empty() || !box.overlaps(box_)) return out;
  int i0 = cx(box.x0), i1 = cx(box.x1), j0 = cy(box.y0), j1 = cy(box.y1);
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j) {
      std::size_t c = static_cast<std::size_t>(i) * ny_ + j;
      out.insert(out.end(), items_.begin() + start_[c], items_.begin() + start_[c + 1]);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double SegmentSet::distance(Vec2 p) const { return nearest(p).first; }

std::pair<double, std::size_t> SegmentSet::nearest(Vec2 p) const {
  if (segs_.empty()) return {kInf, 0};
  std::size_t arg = 0;
  int ci = cx(p.x), cj = cy(p.y);
  double best = kInf;
  int rmax = std::max(nx_, ny_);
  for (int r = 0; r <= rmax; ++r) {
    double ring_min = kInf;
    for (int i = ci - r; i <= ci + r; ++i) {
      if (i < 0 || i >= nx_) continue;
      for (int j = cj - r; j <= cj + r; ++j) {
        if (j < 0 || j >= ny_) continue;
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
        Box cb{box_.x0 + i * cell_, box_.y0 + j * cell_, box_.x0 + (i + 1) * cell_, box_.y0 + (j + 1) * cell_};
        double bd = box_distance(cb, p);
        ring_min = std::min(ring_min, bd);
        if (bd >= best) continue;
        std::size_t c = static_cast<std::size_t>(i) * ny_ + j;
        for (auto k = start_[c]; k < start_[c + 1]; ++k) {
          const Segment& s = segs_[items_[k]];
          double d = point_segment_distance(p, s.a, s.b);
          if (d < best || (d == best && items_[k] < arg)) best = d, arg = items_[k];
        }
      }
    }
    if (ring_min == kInf && r > 0 && ci - r < 0 && cj - r < 0 && ci + r >= nx_ && cj + r >= ny_) break;
    if (ring_min >= best) break;
  }
  return {best, arg};
}

std::size_t SegmentSet::components(double tol) const {
  Dsu dsu(segs_.size());
  for (std::size_t a = 0; a < segs_.size(); ++a) {
    const Segment& s = segs_[a];
    Box b = bounding_box({s.a, s.b});
    b = {b.x0 - tol, b.y0 - tol, b.x1 + tol, b.y1 + tol};
    for (auto idx : query(b))
      if (idx > a && segment_segment_distance(s, segs_[idx]) <= tol) dsu.unite(a, idx);
  }
  std::size_t n = 0;
  for (std::size_t a = 0; a < segs_.size(); ++a) n += dsu.find(a) == a;
  return n;
}

double directed_hausdorff(const SegmentSet& A, const SegmentSet& B, double diam, double tol) {
  if (A.empty()) return 0.0;
  if (B.empty()) return diam;
  double best = 0.0;
  struct Node {
    double t0, t1, g0, g1, ub;
    std::size_t j0, j1;
    bool operator<(const Node& o) const { return ub < o.ub; }
  };
  const auto& bs = B.segments();
  for (const auto& s : A.segments()) {
    double L = s.length();
    auto [g0, j0] = B.nearest(s.a);
    auto [g1, j1] = B.nearest(s.b);
    best = std::max({best, g0, g1});
    if (L == 0) continue;
    auto dj = [&](std::size_t j, double t) { return point_segment_distance(s.at(t), bs[j].a, bs[j].b); };
    // g is 1-Lipschitz in arclength, and below each convex d(., B_j)
    auto bound = [&](double t0, double t1, double ga, double gb, std::size_t ja, std::size_t jb) {
      double ub = 0.5 * (ga + gb + (t1 - t0) * L);
      ub = std::min(ub, std::max(ga, dj(ja, t1)));
      ub = std::min(ub, std::max(dj(jb, t0), gb));
      return ub;
    };
    std::priority_queue<Node> heap;
    heap.push({0.0, 1.0, g0, g1, bound(0.0, 1.0, g0, g1, j0, j1), j0, j1});
    while (!heap.empty()) {
      Node n = heap.top();
      heap.pop();
      if (n.ub <= best + tol) break;
      double tm = 0.5 * (n.t0 + n.t1);
      auto [gm, jm] = B.nearest(s.at(tm));
      best = std::max(best, gm);
      if ((n.t1 - n.t0) * L * 0.5 <= tol) continue;
      heap.push({n.t0, tm, n.g0, gm, bound(n.t0, tm, n.g0, gm, n.j0, jm), n.j0, jm});
      heap.push({tm, n.t1, gm, n.g1, bound(tm, n.t1, gm, n.g1, jm, n.j1), jm, n.j1});
    }
  }
  return best;
}

double hausdorff_distance(const SegmentSet& A, const SegmentSet& B, double diam, double tol) {
  return std::max(directed_hausdorff(A, B, diam, tol), directed_hausdorff(B, A, diam, tol));
}

double tube_area(const SegmentSet& S, double rho) {
  struct Piece {
    Vec2 a, b;
    double xlo, xhi;
    Vec2 up0, up1, lo0, lo1;  // offset lines, left to right
    bool point;
  };
  std::vector<Piece> pieces;
  std::vector<double> breaks;
  for (auto s : S.segments()) {
    if (s.a.x > s.b.x) std::swap(s.a, s.b);
    Piece p{};
    p.a = s.a;
    p.b = s.b;
    p.xlo = s.a.x - rho;
    p.xhi = s.b.x + rho;
    Vec2 d = s.b - s.a;
    double len = norm(d);
    p.point = len == 0;
    if (!p.point) {
      Vec2 n{-d.y / len, d.x / len};
      if (n.y < 0 || (n.y == 0 && n.x < 0)) n = -1.0 * n;
      p.up0 = s.a + rho * n;
      p.up1 = s.b + rho * n;
      p.lo0 = s.a - rho * n;
      p.lo1 = s.b - rho * n;
      for (Vec2 q : {p.up0, p.up1, p.lo0, p.lo1}) breaks.push_back(q.x);
    }
    for (double x : {s.a.x - rho, s.a.x, s.a.x + rho, s.b.x - rho, s.b.x, s.b.x + rho}) breaks.push_back(x);
    pieces.push_back(p);
  }
  if (pieces.empty()) return 0.0;
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto line_y = [](Vec2 p, Vec2 q, double x, double& y) {
    double lo = std::min(p.x, q.x), hi = std::max(p.x, q.x);
    if (x < lo || x > hi) return false;
    if (q.x == p.x) return false;
    y = p.y + (q.y - p.y) * (x - p.x) / (q.x - p.x);
    return true;
  };

  auto section = [&](const Piece& p, double x, double& ylo, double& yhi) {
    ylo = kInf;
    yhi = -kInf;
    for (Vec2 c : {p.a, p.b}) {
      double dx = x - c.x;
      if (std::abs(dx) < rho) {
        double h = std::sqrt(rho * rho - dx * dx);
        ylo = std::min(ylo, c.y - h);
        yhi = std::max(yhi, c.y + h);
      }
    }
    if (!p.point) {
      double y;
      if (p.a.x == p.b.x) {
        // vertical: caps already give the extreme points, fill the middle
        if (std::abs(x - p.a.x) < rho) {
          double h = std::sqrt(rho * rho - (x - p.a.x) * (x - p.a.x));
          ylo = std::min(ylo, std::min(p.a.y, p.b.y) - h);
          yhi = std::max(yhi, std::max(p.a.y, p.b.y) + h);
        }
      } else {
        if (line_y(p.up0, p.up1, x, y)) yhi = std::max(yhi, y), ylo = std::min(ylo, y);
        if (line_y(p.lo0, p.lo1, x, y)) ylo = std::min(ylo, y), yhi = std::max(yhi, y);
      }
    }
    return ylo < yhi;
  };

  double total = 0.0;
  std::vector<std::pair<double, double>> iv;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    double x0 = breaks[k], x1 = breaks[k + 1];
    std::vector<const Piece*> active;
    for (const auto& p : pieces)
      if (p.xlo < x1 && p.xhi > x0) active.push_back(&p);
    if (active.empty()) continue;
    auto f = [&](double x) {
      iv.clear();
      for (const Piece* p : active) {
        double lo, hi;
        if (section(*p, x, lo, hi)) iv.push_back({lo, hi});
      }
      std::sort(iv.begin(), iv.end());
      double len = 0.0, cl = -kInf, ch = -kInf;
      for (auto [lo, hi] : iv) {
        if (lo > ch) {
          if (ch > cl) len += ch - cl;
          cl = lo;
          ch = hi;
        } else {
          ch = std::max(ch, hi);
        }
      }
      if (ch > cl) len += ch - cl;
      return len;
    };
    total += integrate(f, x0, x1, 1e-15, 1e-9).value;
  }
  return total;
}

double minkowski_ratio(const SegmentSet& S, double rho) { return tube_area(S, rho) / (2.0 * rho); }

std::optional<Segment> clip_segment(const Segment& s, const std::vector<Vec2>& poly) {
  double t0 = 0.0, t1 = 1.0;
  Vec2 d = s.b - s.a;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Vec2 a = poly[i], e = poly[(i + 1) % poly.size()] - a;
    Vec2 n{-e.y, e.x};  // inward
    double num = dot(n, s.a - a), den = dot(n, d);
    if (den == 0) {
      if (num < 0) return std::nullopt;
      continue;
    }
    double t = -num / den;
    if (den > 0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t0 > t1) return std::nullopt;
  }
  return Segment{s.at(t0), s.at(t1)};
}

}  // namespace vpyr
