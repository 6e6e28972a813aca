#include "vpyr/piecewise_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vpyr {

bool PiecewiseAffineMap::exact() const {
  for (const auto& c : cells) {
    if (!c.offset.exact()) return false;
    for (const auto& v : c.vertices)
      if (!v.exact()) return false;
  }
  return true;
}

namespace {

struct EdgeRec {
  int cls;        // 0 horizontal, 1 vertical, 2 slope +1, 3 slope -1, 4 other
  double theta;   // only for cls 4
  double offset;
  double t0, t1;  // t0 < t1
  Point p0, p1;   // endpoints matching t0, t1
  int cell;
  int side;       // +1 cell on the left of the canonical direction
};

}  // namespace

Arrangement build_arrangement(const std::vector<ConvexCell>& cells, double tol) {
  double extent = 0.0;
  for (const auto& c : cells)
    for (const auto& v : c.vertices) extent = std::max({extent, std::abs(v.x.value()), std::abs(v.y.value())});
  double atol = tol * std::max(1.0, extent);
  double dir_tol = tol > 0 ? 1e-9 : 0.0;

  std::vector<EdgeRec> edges;
  for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
    const auto& poly = cells[ci].vertices;
    Vec2 cen{0, 0};
    for (const auto& v : poly) cen = cen + v.v();
    cen = (1.0 / poly.size()) * cen;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      Point P = poly[k], Q = poly[(k + 1) % poly.size()];
      Vec2 p = P.v(), q = Q.v();
      Vec2 d = q - p;
      double len = norm(d);
      if (len == 0) continue;
      if (d.x < 0 || (d.x == 0 && d.y < 0)) {
        std::swap(p, q);
        std::swap(P, Q);
        d = q - p;
      }
      EdgeRec e{};
      e.cell = ci;
      e.side = cross(d, cen - p) > 0 ? 1 : -1;
      if (std::abs(d.y) <= dir_tol * len) {
        e.cls = 0, e.offset = 0.5 * (p.y + q.y), e.t0 = p.x, e.t1 = q.x;
      } else if (std::abs(d.x) <= dir_tol * len) {
        e.cls = 1, e.offset = 0.5 * (p.x + q.x), e.t0 = p.y, e.t1 = q.y;
      } else if (std::abs(d.x - d.y) <= dir_tol * len) {
        e.cls = 2, e.offset = 0.5 * ((p.y - p.x) + (q.y - q.x)), e.t0 = p.x, e.t1 = q.x;
      } else if (std::abs(d.x + d.y) <= dir_tol * len) {
        e.cls = 3, e.offset = 0.5 * ((p.y + p.x) + (q.y + q.x)), e.t0 = p.x, e.t1 = q.x;
      } else {
        Vec2 u = (1.0 / len) * d;
        e.cls = 4, e.theta = std::atan2(d.y, d.x), e.offset = cross(u, p), e.t0 = dot(u, p), e.t1 = dot(u, q);
      }
      e.p0 = P;
      e.p1 = Q;
      edges.push_back(e);
    }
  }

  std::sort(edges.begin(), edges.end(), [](const EdgeRec& a, const EdgeRec& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.theta != b.theta) return a.theta < b.theta;
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.t0 < b.t0;
  });

  Arrangement out;
  std::size_t i = 0;
  while (i < edges.size()) {
    std::size_t j = i + 1;
    while (j < edges.size() && edges[j].cls == edges[i].cls &&
           edges[j].theta - edges[j - 1].theta <= 1e-9 * (tol > 0) &&
           edges[j].offset - edges[j - 1].offset <= atol)
      ++j;
    std::sort(edges.begin() + i, edges.begin() + j,
              [](const EdgeRec& a, const EdgeRec& b) { return a.t0 < b.t0; });
    // breakpoints along this line
    std::vector<std::pair<double, Point>> ts;
    for (std::size_t k = i; k < j; ++k) {
      ts.push_back({edges[k].t0, edges[k].p0});
      ts.push_back({edges[k].t1, edges[k].p1});
    }
    std::sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<double, Point>> brk;
    for (const auto& t : ts)
      if (brk.empty() || t.first - brk.back().first > atol) brk.push_back(t);

    std::vector<std::size_t> active;
    std::size_t next = i;
    int cur_pos = -2, cur_neg = -2;
    Point start;
    for (std::size_t b = 0; b + 1 < brk.size(); ++b) {
      double lo = brk[b].first, hi = brk[b + 1].first;
      while (next < j && edges[next].t0 <= lo + atol) active.push_back(next++);
      std::erase_if(active, [&](std::size_t e) { return edges[e].t1 < hi - atol; });
      int pos = -1, neg = -1, npos = 0, nneg = 0;
      for (auto e : active) {
        if (edges[e].side > 0) pos = edges[e].cell, ++npos;
        else neg = edges[e].cell, ++nneg;
      }
      if (npos > 1 || nneg > 1) ++out.overlaps;
      if (pos != cur_pos || neg != cur_neg) {
        if (cur_pos >= 0 || cur_neg >= 0) out.interfaces.push_back({start, brk[b].second, cur_pos, cur_neg});
        cur_pos = pos;
        cur_neg = neg;
        start = brk[b].second;
      }
    }
    if ((cur_pos >= 0 || cur_neg >= 0) && !brk.empty())
      out.interfaces.push_back({start, brk.back().second, cur_pos, cur_neg});
    i = j;
  }
  return out;
}

ContinuityReport check_continuity(const std::vector<ConvexCell>& cells, const Arrangement& arr) {
  ContinuityReport rep;
  rep.overlaps = arr.overlaps;
  for (std::size_t k = 0; k < arr.interfaces.size(); ++k) {
    const auto& f = arr.interfaces[k];
    if (!f.shared()) {
      ++rep.frontier_edges;
      continue;
    }
    ++rep.shared_edges;
    const auto& A = cells[f.pos];
    const auto& B = cells[f.neg];
    Point mid = Scalar::pow2(-1) * (f.a + f.b);
    for (const Point& p : {f.a, f.b, mid}) {
      Point d = A.value(p) - B.value(p);
      Scalar m = max(d.x.abs(), d.y.abs());
      if (rep.worst_interface < 0 || m > rep.max_defect) {
        rep.max_defect = m;
        rep.worst_interface = static_cast<int>(k);
      }
    }
  }
  return rep;
}

CellIndex::CellIndex(const std::vector<ConvexCell>& cells) : cells_(&cells) {
  polys_.reserve(cells.size());
  std::vector<Vec2> all;
  for (const auto& c : cells) {
    polys_.push_back(to_vec(c.vertices));
    boxes_.push_back(bounding_box(polys_.back()));
    all.push_back({boxes_.back().x0, boxes_.back().y0});
    all.push_back({boxes_.back().x1, boxes_.back().y1});
  }
  if (cells.empty()) return;
  box_ = bounding_box(all);
  double ext = std::max(box_.x1 - box_.x0, box_.y1 - box_.y0);
  int res = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(cells.size()))), 1, 2048);
  cell_ = ext > 0 ? ext / res : 1.0;
  nx_ = static_cast<int>((box_.x1 - box_.x0) / cell_) + 1;
  ny_ = static_cast<int>((box_.y1 - box_.y0) / cell_) + 1;
  std::vector<std::uint32_t> count(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  auto range = [&](const Box& b, int& i0, int& i1, int& j0, int& j1) {
    i0 = std::clamp(static_cast<int>((b.x0 - box_.x0) / cell_), 0, nx_ - 1);
    i1 = std::clamp(static_cast<int>((b.x1 - box_.x0) / cell_), 0, nx_ - 1);
    j0 = std::clamp(static_cast<int>((b.y0 - box_.y0) / cell_), 0, ny_ - 1);
    j1 = std::clamp(static_cast<int>((b.y1 - box_.y0) / cell_), 0, ny_ - 1);
  };
  for (const auto& b : boxes_) {
    int i0, i1, j0, j1;
    range(b, i0, i1, j0, j1);
    for (int x = i0; x <= i1; ++x)
      for (int y = j0; y <= j1; ++y) ++count[static_cast<std::size_t>(x) * ny_ + y + 1];
  }
  start_.assign(count.size(), 0);
  for (std::size_t c = 1; c < count.size(); ++c) start_[c] = start_[c - 1] + count[c];
  items_.assign(start_.back(), 0);
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::uint32_t k = 0; k < boxes_.size(); ++k) {
    int i0, i1, j0, j1;
    range(boxes_[k], i0, i1, j0, j1);
    for (int x = i0; x <= i1; ++x)
      for (int y = j0; y <= j1; ++y) items_[fill[static_cast<std::size_t>(x) * ny_ + y]++] = k;
  }
}

std::optional<std::size_t> CellIndex::locate(Vec2 p, double tol) const {
  if (polys_.empty()) return std::nullopt;
  Box probe{p.x - tol, p.y - tol, p.x + tol, p.y + tol};
  if (!probe.overlaps(box_)) return std::nullopt;
  int i = std::clamp(static_cast<int>((p.x - box_.x0) / cell_), 0, nx_ - 1);
  int j = std::clamp(static_cast<int>((p.y - box_.y0) / cell_), 0, ny_ - 1);
  std::size_t c = static_cast<std::size_t>(i) * ny_ + j;
  std::optional<std::size_t> best;
  for (auto k = start_[c]; k < start_[c + 1]; ++k) {
    auto id = items_[k];
    const Box& b = boxes_[id];
    if (p.x < b.x0 - tol || p.x > b.x1 + tol || p.y < b.y0 - tol || p.y > b.y1 + tol) continue;
    if (point_in_convex(p, polys_[id], tol) && (!best || id < *best)) best = id;
  }
  if (best || tol == 0) return best;
  // a point within tol of a grid line may belong to a cell registered only next door
  for (auto id : query(probe))
    if (point_in_convex(p, polys_[id], tol)) return id;
  return std::nullopt;
}

std::vector<std::uint32_t> CellIndex::query(const Box& box) const {
  std::vector<std::uint32_t> out;
  if (polys_.empty() || !box.overlaps(box_)) return out;
  int i0 = std::clamp(static_cast<int>((box.x0 - box_.x0) / cell_), 0, nx_ - 1);
  int i1 = std::clamp(static_cast<int>((box.x1 - box_.x0) / cell_), 0, nx_ - 1);
  int j0 = std::clamp(static_cast<int>((box.y0 - box_.y0) / cell_), 0, ny_ - 1);
  int j1 = std::clamp(static_cast<int>((box.y1 - box_.y0) / cell_), 0, ny_ - 1);
  for (int x = i0; x <= i1; ++x)
    for (int y = j0; y <= j1; ++y) {
      std::size_t c = static_cast<std::size_t>(x) * ny_ + y;
      for (auto k = start_[c]; k < start_[c + 1]; ++k)
        if (boxes_[items_[k]].overlaps(box)) out.push_back(items_[k]);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace vpyr
