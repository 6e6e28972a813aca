#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace vpyr {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece gk15(F& f, double a, double b) {
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int i = 0; i < 7; ++i) {
    double dx = h * kXgk[i];
    double s = f(c - dx) + f(c + dx);
    kron += kWgk[i] * s;
    if (i % 2 == 1) gauss += kWg[i / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

// Globally adaptive 7/15-point Gauss-Kronrod. The interval with the largest
// error estimate is bisected until the total estimate meets the tolerance.
// Evaluation order depends only on f's values, so results are reproducible.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10,
                     int max_pieces = 4000) {
  if (!(b > a)) return {};
  std::priority_queue<detail::Piece> heap;
  heap.push(detail::gk15(f, a, b));
  double total = heap.top().value;
  double err = heap.top().error;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && static_cast<int>(heap.size()) < max_pieces) {
    detail::Piece p = heap.top();
    heap.pop();
    double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      heap.push(p);
      break;
    }
    detail::Piece l = detail::gk15(f, p.a, m);
    detail::Piece r = detail::gk15(f, m, p.b);
    heap.push(l);
    heap.push(r);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
  }
  QuadResult out;
  std::vector<detail::Piece> pieces;
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  for (const auto& p : pieces) {
    out.value += p.value;
    out.error += p.error;
  }
  out.converged = out.error <= std::max(abs_tol, rel_tol * std::abs(out.value));
  return out;
}

// Sum of integrals over consecutive breakpoints, so known kinks of f never
// fall inside a Kronrod panel.
template <class F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& breaks, double abs_tol = 1e-12,
                            double rel_tol = 1e-10) {
  QuadResult out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    QuadResult r = integrate(f, breaks[i], breaks[i + 1], abs_tol, rel_tol);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  return out;
}

}  // namespace vpyr
