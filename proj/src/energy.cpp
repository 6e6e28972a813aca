#include "vpyr/energy.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "vpyr/quadrature.hpp"

namespace vpyr {

namespace {

using Interval = std::pair<double, double>;

struct TemplateJump {
  Vec2 a, b;
  Mat2i jump;
  SignedMatrix left, right;
};

const std::vector<TemplateJump>& template_jumps(int depth) {
  static std::mutex mu;
  static std::map<int, std::vector<TemplateJump>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(depth);
    if (it != cache.end()) return it->second;
  }
  const auto& tpl = pyramid_template(depth);
  Arrangement arr = build_arrangement(tpl.cells, 0.0);
  std::vector<TemplateJump> out;
  for (const auto& f : arr.interfaces) {
    if (!f.shared()) continue;
    const Mat2i& L = tpl.cells[f.pos].gradient;
    const Mat2i& R = tpl.cells[f.neg].gradient;
    if (L == R) continue;
    out.push_back({f.a.v(), f.b.v(), L - R, *SignedMatrix::from_matrix(L), *SignedMatrix::from_matrix(R)});
  }
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(depth, std::move(out)).first->second;
}

// Runs f(i) for i < n on a pool; callers write results by index so the
// outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

constexpr std::size_t kBlock = 4096;

// Integral of (2 - |v|_inf)^alpha over v(t) = a + t (b - a), t in [t0, t1],
// with respect to arc length. Breaks where |x| = |y|.
double template_weight(Vec2 a, Vec2 b, double t0, double t1, double alpha) {
  Vec2 d = b - a;
  double len = norm(d);
  if (!(t1 > t0) || len == 0.0) return 0.0;
  if (alpha == 0.0) return len * (t1 - t0);
  std::vector<double> br{t0};
  for (double s : {1.0, -1.0}) {
    double den = d.x - s * d.y;
    if (den == 0.0) continue;
    double t = -(a.x - s * a.y) / den;
    if (t > t0 && t < t1) br.push_back(t);
  }
  br.push_back(t1);
  std::sort(br.begin(), br.end());
  auto f = [&](double t) {
    Vec2 p = a + t * d;
    double w = 2.0 - std::max(std::abs(p.x), std::abs(p.y));
    return w > 0.0 ? std::pow(w, alpha) : 0.0;
  };
  return len * integrate_pieces(f, br, 1e-15, 1e-12).value;
}

// Parameter interval of the line a + t d inside the stadium of radius r
// around segment e, or nothing.
std::optional<Interval> stadium_interval(Vec2 a, Vec2 d, const Segment& e, double r) {
  double lo = INFINITY, hi = -INFINITY;
  auto disk = [&](Vec2 c) {
    double A = dot(d, d), B = 2.0 * dot(d, a - c), C = dot(a - c, a - c) - r * r;
    double disc = B * B - 4 * A * C;
    if (A == 0.0 || disc < 0) return;
    double s = std::sqrt(disc);
    lo = std::min(lo, (-B - s) / (2 * A));
    hi = std::max(hi, (-B + s) / (2 * A));
  };
  disk(e.a);
  disk(e.b);
  Vec2 u = e.b - e.a;
  double L = norm(u);
  if (L > 0) {
    u = (1.0 / L) * u;
    Vec2 n{-u.y, u.x};
    double t0 = -INFINITY, t1 = INFINITY;
    // lo_k <= p + t q <= hi_k for both strip directions
    auto band = [&](double p, double q, double lo_k, double hi_k) {
      if (q == 0.0) {
        if (p < lo_k || p > hi_k) t0 = INFINITY;
        return;
      }
      double x0 = (lo_k - p) / q, x1 = (hi_k - p) / q;
      if (x0 > x1) std::swap(x0, x1);
      t0 = std::max(t0, x0);
      t1 = std::min(t1, x1);
    };
    band(dot(a - e.a, u), dot(d, u), 0.0, L);
    band(dot(a - e.a, n), dot(d, n), -r, r);
    if (t0 <= t1) {
      lo = std::min(lo, t0);
      hi = std::max(hi, t1);
    }
  }
  if (!(lo <= hi)) return std::nullopt;
  return Interval{lo, hi};
}

// Subintervals of [0, 1] where a + t d is farther than delta from the set.
std::vector<Interval> far_intervals(Vec2 a, Vec2 b, const SegmentSet& bnd, double delta) {
  if (delta <= 0.0) return {{0.0, 1.0}};
  Vec2 d = b - a;
  Box box{std::min(a.x, b.x) - delta, std::min(a.y, b.y) - delta, std::max(a.x, b.x) + delta,
          std::max(a.y, b.y) + delta};
  std::vector<Interval> near;
  for (auto k : bnd.query(box)) {
    auto iv = stadium_interval(a, d, bnd.segments()[k], delta);
    if (iv && iv->second > 0.0 && iv->first < 1.0) near.push_back({std::max(0.0, iv->first), std::min(1.0, iv->second)});
  }
  std::sort(near.begin(), near.end());
  std::vector<Interval> out;
  double t = 0.0;
  for (const auto& iv : near) {
    if (iv.first > t) out.push_back({t, iv.first});
    t = std::max(t, iv.second);
  }
  if (t < 1.0) out.push_back({t, 1.0});
  return out;
}

// Parameter range of a + t d inside [-w, w]^2.
std::optional<Interval> box_interval(Vec2 a, Vec2 d, double w) {
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 2; ++k) {
    double p = k == 0 ? a.x : a.y, q = k == 0 ? d.x : d.y;
    if (q == 0.0) {
      if (std::abs(p) > w) return std::nullopt;
      continue;
    }
    double x0 = (-w - p) / q, x1 = (w - p) / q;
    if (x0 > x1) std::swap(x0, x1);
    t0 = std::max(t0, x0);
    t1 = std::min(t1, x1);
  }
  if (!(t0 < t1)) return std::nullopt;
  return Interval{t0, t1};
}

// |(J R^T)(j, i)| arranged as [i][j]
Matrix2 entry_weights(const Mat2i& J, const Mat2i& Rt) {
  Mat2i M = J * Rt;
  Matrix2 w{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) w[i][j] = std::abs(M(j, i));
  return w;
}

void add_scaled(Matrix2& acc, const Matrix2& w, double s) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) acc[i][j] += w[i][j] * s;
}

const std::vector<double>& template_weights(int depth, double alpha, int threads) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::vector<double>> cache;
  auto key = std::make_pair(depth, alpha);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const auto& tj = template_jumps(depth);
  std::vector<double> w(tj.size());
  parallel_for(tj.size(), threads, [&](std::size_t i) { w[i] = template_weight(tj[i].a, tj[i].b, 0.0, 1.0, alpha); });
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, std::move(w)).first->second;
}

}  // namespace

std::vector<JumpSegment> jump_segments(const Solution& sol, const std::optional<std::vector<Vec2>>& region) {
  const auto& tj = template_jumps(sol.depth);
  std::vector<JumpSegment> out;
  for (std::size_t q = 0; q < sol.covering.squares.size(); ++q) {
    const auto& sq = sol.covering.squares[q];
    Mat2i R = quarter_turn(sq.rotation), Rt = R.transpose();
    Vec2 c = sq.center.v();
    double scale = sq.side.value() / 4;
    for (const auto& t : tj) {
      Segment s{c + scale * R.apply(t.a), c + scale * R.apply(t.b)};
      if (region) {
        auto cl = clip_segment(s, *region);
        if (!cl || cl->length() == 0.0) continue;
        s = *cl;
      }
      auto L = SignedMatrix::from_matrix(t.left.matrix() * Rt);
      auto Rm = SignedMatrix::from_matrix(t.right.matrix() * Rt);
      out.push_back({s, *L, *Rm, t.jump * Rt, q});
    }
  }
  return out;
}

double energy_f1(const Solution& sol, double delta, int threads) {
  const auto& segs = sol.sigma.segments();
  std::vector<double> part(segs.size(), 0.0);
  parallel_for(segs.size(), threads, [&](std::size_t i) {
    const Segment& s = segs[i];
    double len = s.length();
    auto f = [&](double t) { return sol.boundary.distance(s.at(t)); };
    double v = 0.0;
    for (const auto& iv : far_intervals(s.a, s.b, sol.boundary, delta))
      v += len * integrate(f, iv.first, iv.second, 1e-12, 1e-10).value;
    part[i] = v;
  });
  double total = 0.0;
  for (double v : part) total += v;
  return total;
}

Matrix2 energy_f2(const Solution& sol, double alpha, double delta, double h, int threads) {
  const auto& tj = template_jumps(sol.depth);
  const auto& squares = sol.covering.squares;
  Matrix2 total{};
  if (delta <= 0.0 && h <= 0.0) {
    // every square is a scaled copy of the template
    const auto& w = template_weights(sol.depth, alpha, threads);
    std::array<Matrix2, 4> per_rot{};
    for (int r = 0; r < 4; ++r) {
      Mat2i Rt = quarter_turn(r).transpose();
      for (std::size_t i = 0; i < tj.size(); ++i) add_scaled(per_rot[r], entry_weights(tj[i].jump, Rt), w[i]);
    }
    for (const auto& q : squares)
      add_scaled(total, per_rot[((q.rotation % 4) + 4) % 4], std::pow(q.side.value() / 4, alpha + 1));
    return total;
  }
  std::size_t blocks = (tj.size() + kBlock - 1) / kBlock;
  std::vector<Matrix2> part(squares.size() * blocks, Matrix2{});
  parallel_for(part.size(), threads, [&](std::size_t item) {
    const auto& q = squares[item / blocks];
    std::size_t b0 = (item % blocks) * kBlock, b1 = std::min(tj.size(), b0 + kBlock);
    double scale = q.side.value() / 4;
    Vec2 c = q.center.v();
    double reach = q.side.value() * std::sqrt(0.5);
    bool cut = false;
    if (delta > 0.0) {
      double dc = sol.boundary.distance(c);
      if (dc + reach <= delta) return;
      cut = dc - reach <= delta;
    }
    double w = 2.0 - h / scale;
    if (w <= 0.0) return;
    Mat2i R = quarter_turn(q.rotation), Rt = R.transpose();
    Matrix2 acc{};
    for (std::size_t i = b0; i < b1; ++i) {
      const auto& t = tj[i];
      auto in_box = box_interval(t.a, t.b - t.a, w);
      if (!in_box) continue;
      std::vector<Interval> keep{*in_box};
      if (cut) {
        Vec2 ga = c + scale * R.apply(t.a), gb = c + scale * R.apply(t.b);
        std::vector<Interval> k2;
        for (const auto& iv : far_intervals(ga, gb, sol.boundary, delta)) {
          double lo = std::max(iv.first, in_box->first), hi = std::min(iv.second, in_box->second);
          if (lo < hi) k2.push_back({lo, hi});
        }
        keep = std::move(k2);
      }
      double v = 0.0;
      for (const auto& iv : keep) v += template_weight(t.a, t.b, iv.first, iv.second, alpha);
      add_scaled(acc, entry_weights(t.jump, Rt), v);
    }
    double s = std::pow(scale, alpha + 1);
    for (auto& row : acc)
      for (auto& x : row) x *= s;
    part[item] = acc;
  });
  for (const auto& p : part) add_scaled(total, p, 1.0);
  return total;
}

double tail_bound_square(double a, double alpha, int K) {
  if (!(alpha > 0.0)) throw std::domain_error("divergent tail");
  // level n > K: at most 8 * 2^n squares of side a 2^-(n+1) at distance
  // at most a 2^-n from sigma, jump entries at most 2
  return 8.0 * kSquareJumpLength * std::pow(a, alpha + 1) * std::exp2(-(K + 1) * alpha) / -std::expm1(-alpha * M_LN2);
}

namespace {

// Squares after step m have side at most extent * r^step, 2^step of them.
double triangle_series(double r_max, double extent, double alpha, int m_max) {
  double rho = 2.0 * std::pow(r_max, alpha + 1);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "series divergent: 2*max(r_B, r_H)^(alpha+1) = " << rho << " >= 1, needs alpha > "
        << std::log(2.0) / -std::log(r_max) - 1;
    throw std::domain_error(msg.str());
  }
  double c_sq = tail_bound_square(1.0, alpha, 0);
  return c_sq * std::pow(extent, alpha + 1) * std::pow(rho, m_max + 1) / (1.0 - rho);
}

}  // namespace

double tail_bound_triangle(const TriangularDomain& T, double alpha, int m_max) {
  if (!(alpha > 0.0)) throw std::domain_error("divergent tail");
  double r_max = std::max(T.c1() / (1 + T.c1()), 1 / (1 + T.c2()));
  double extent = std::max((T.ha() - T.hb()).value(), (T.b - T.a).value());
  return triangle_series(r_max, extent, alpha, m_max);
}

TailCertificate energy_tail(const Solution& sol, double alpha) {
  TailCertificate tc;
  tc.certified = true;
  for (const auto& q : sol.covering.squares) tc.f2_entry += tail_bound_square(q.side.value(), alpha, sol.depth);
  Box bb = sol.boundary.bbox();
  double inradius = 0.5 * std::min(bb.x1 - bb.x0, bb.y1 - bb.y0);
  double c_sq = tail_bound_square(1.0, alpha, 0);
  for (const auto& p : sol.covering.pieces) {
    switch (p.kind) {
      case Provenance::Rectangle:
        // the remaining squares have side sum at most residual_sides
        tc.f2_entry += c_sq * std::pow(p.residual_sides, alpha + 1);
        tc.f1 += 4.0 * p.residual_sides * inradius;
        break;
      case Provenance::Triangle: {
        tc.f2_entry += triangle_series(p.r_max, p.extent, alpha, p.m_max);
        // a point of a later square lies below the graph by at most the
        // height of its subtriangle, so the graph has to be boundary
        bool on_boundary = !p.graph.empty();
        for (auto v : p.graph) on_boundary = on_boundary && sol.boundary.distance(v) <= 1e-2 * p.extent;
        double q2 = 2.0 * p.r_max * p.r_max;
        if (on_boundary && q2 < 1.0) {
          tc.f1 += 4.0 * p.extent * p.extent * std::pow(q2, p.m_max + 1) / (1.0 - q2);
        } else {
          tc.certified = false;
          tc.reason = "triangle graph is not part of the boundary";
        }
        break;
      }
      case Provenance::Vitali:
        tc.certified = false;
        tc.reason = "no tail certificate for Vitali coverings";
        break;
    }
  }
  return tc;
}

std::vector<EnergyReport> energy_report(const Solution& sol, double alpha, const std::vector<double>& deltas,
                                        const std::vector<double>& hs, const EnergyOptions& opt) {
  std::vector<std::pair<double, double>> grid{{0.0, 0.0}};
  for (double d : deltas.empty() ? std::vector<double>{0.0} : deltas)
    for (double h : hs.empty() ? std::vector<double>{0.0} : hs)
      if (d != 0.0 || h != 0.0) grid.push_back({d, h});
  std::vector<EnergyReport> rows;
  for (const auto& [d, h] : grid) {
    EnergyReport r;
    r.alpha = alpha;
    r.delta = d;
    r.h = h;
    r.depth = sol.depth;
    r.f1 = energy_f1(sol, d, opt.threads);
    r.f1_exact = r.f1 == 0.0;
    r.f2 = energy_f2(sol, alpha, d, h, opt.threads);
    if (d == 0.0 && h == 0.0) {
      TailCertificate tc;
      try {
        tc = energy_tail(sol, alpha);
      } catch (const std::domain_error& e) {
        if (opt.certify_tail) throw;
        tc = {};
        tc.reason = e.what();
      }
      if (opt.certify_tail && !tc.certified) throw std::domain_error(tc.reason);
      r.tail = tc;
    }
    rows.push_back(r);
  }
  return rows;
}

namespace {

using nlohmann::json;

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(std::stod(fmt12(v))) : json(nullptr); }

// exact dyadic form of a value given to 12 digits, when it has one
json dyadic(double v) {
  auto s = Scalar::parse(fmt12(v));
  if (s && s->exact()) return s->str();
  return nullptr;
}

}  // namespace

std::string energy_json(const std::vector<EnergyReport>& rows) {
  json out;
  out["format"] = "vpyr-energy-1";
  out["rows"] = json::array();
  for (const auto& r : rows) {
    json j;
    j["depth"] = r.depth;
    j["alpha"] = num(r.alpha);
    j["alpha_dyadic"] = dyadic(r.alpha);
    j["delta"] = num(r.delta);
    j["delta_dyadic"] = dyadic(r.delta);
    j["h"] = num(r.h);
    j["h_dyadic"] = dyadic(r.h);
    j["F1"] = num(r.f1);
    j["F1_exact"] = r.f1_exact;
    if (r.f1_exact) j["F1_dyadic"] = "0";
    j["F2"] = {{num(r.f2[0][0]), num(r.f2[0][1])}, {num(r.f2[1][0]), num(r.f2[1][1])}};
    j["F2_exact"] = false;
    j["F2_sum"] = num(r.f2_sum());
    j["total"] = num(r.total());
    if (r.tail) {
      const auto& t = *r.tail;
      j["tail"] = {{"certified", t.certified},
                   {"reason", t.reason},
                   {"F1", num(t.f1)},
                   {"F2_entry", num(t.f2_entry)},
                   {"total", num(t.total())}};
      j["total_with_tail"] = t.certified ? num(r.total() + t.total()) : json(nullptr);
    }
    out["rows"].push_back(j);
  }
  return out.dump(1) + "\n";
}

std::string energy_csv(const std::vector<EnergyReport>& rows, bool header) {
  std::string out;
  if (header) out += "depth,alpha,delta,h,F1,F2_11,F2_12,F2_21,F2_22,F2_sum,total,tail,total_with_tail\n";
  for (const auto& r : rows) {
    out += std::to_string(r.depth);
    for (double v : {r.alpha, r.delta, r.h, r.f1, r.f2[0][0], r.f2[0][1], r.f2[1][0], r.f2[1][1], r.f2_sum(), r.total()})
      out += "," + fmt12(v);
    if (r.tail && r.tail->certified)
      out += "," + fmt12(r.tail->total()) + "," + fmt12(r.total() + r.tail->total());
    else
      out += ",,";
    out += "\n";
  }
  return out;
}

}  // namespace vpyr
