#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vpyr/covering.hpp"
#include "vpyr/segment_set.hpp"
#include "vpyr/solution.hpp"

namespace vpyr {

struct JumpSegment {
  Segment segment;
  SignedMatrix left;   // gradient to the left of a -> b
  SignedMatrix right;
  Mat2i jump;          // left - right
  std::size_t square = 0;
};

// Interfaces between cells with different gradients, optionally clipped to
// a convex counterclockwise region.
std::vector<JumpSegment> jump_segments(const Solution& sol,
                                       const std::optional<std::vector<Vec2>>& region = std::nullopt);

using Matrix2 = std::array<std::array<double, 2>, 2>;

// Integral of d(x, boundary) over the part of sigma where d > delta.
double energy_f1(const Solution& sol, double delta, int threads = 1);

// F2[i][j]: sum over jump segments of |jump(j, i)| times the integral of
// d(x, sigma)^alpha over the part of the segment with d(x, boundary) > delta
// and d(x, sigma) >= h.
Matrix2 energy_f2(const Solution& sol, double alpha, double delta = 0.0, double h = 0.0, int threads = 1);

// Length of the jump set of the pyramid inside one square, per unit side:
// boundary, both diagonals and both midlines.
inline const double kSquareJumpLength = 6.0 + 2.0 * std::sqrt(2.0);

// Bound on each F2 entry from the levels beyond K of a pyramid in a square
// of side a. Throws std::domain_error("divergent tail") for alpha <= 0.
double tail_bound_square(double a, double alpha, int K);
// Bound on each F2 entry from the squares a triangle covering places after
// step m_max. Throws std::domain_error starting "series divergent" when T is
// not alpha-compatible.
double tail_bound_triangle(const TriangularDomain& T, double alpha, int m_max);

struct TailCertificate {
  bool certified = false;
  std::string reason;
  double f1 = 0.0;
  double f2_entry = 0.0;  // bound for each of the four entries

  double total() const { return f1 + 4.0 * f2_entry; }
};

// Tail of F over everything the truncated solution leaves out: levels beyond
// the depth in every square and squares the covering has not placed.
// Throws std::domain_error when a series diverges.
TailCertificate energy_tail(const Solution& sol, double alpha);

struct EnergyReport {
  double alpha = 0.0;
  double delta = 0.0;
  double h = 0.0;
  int depth = 0;
  double f1 = 0.0;
  Matrix2 f2{};
  bool f1_exact = false;  // F1 vanishes identically (sigma lies on the boundary)
  std::optional<TailCertificate> tail;  // only on the untruncated row delta = h = 0

  double f2_sum() const { return f2[0][0] + f2[0][1] + f2[1][0] + f2[1][1]; }
  double total() const { return f1 + f2_sum(); }
};

struct EnergyOptions {
  int threads = 1;
  // a divergent tail throws instead of being reported as uncertified
  bool certify_tail = false;
};

// One row per (delta, h) pair plus the row delta = h = 0 if missing.
std::vector<EnergyReport> energy_report(const Solution& sol, double alpha, const std::vector<double>& deltas,
                                        const std::vector<double>& hs, const EnergyOptions& opt = {});

std::string energy_json(const std::vector<EnergyReport>& rows);
std::string energy_csv(const std::vector<EnergyReport>& rows, bool header = true);

}  // namespace vpyr
