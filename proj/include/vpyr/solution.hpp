#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vpyr/covering.hpp"
#include "vpyr/piecewise_map.hpp"
#include "vpyr/segment_set.hpp"

namespace vpyr {

struct Solution {
  PiecewiseAffineMap map;
  Covering covering;
  SegmentSet boundary;
  // boundary of the domain together with the boundaries of all covering squares
  SegmentSet sigma;
  int depth = 0;
  // cells of covering square q are [cell_begin[q], cell_begin[q + 1])
  std::vector<std::size_t> cell_begin;

  std::size_t square_of_cell(std::size_t cell) const;
};

// Pyramid cells on (-2,2)^2 at the given depth, shared by every square.
const PiecewiseAffineMap& pyramid_template(int depth);
// Counterclockwise rotation by k quarter turns.
Mat2i quarter_turn(int k);

// Throws std::invalid_argument on an empty covering or depth < 1.
Solution build_solution(const Covering& cov, int depth);

struct ConnectivityCheck {
  double delta = 0.0;
  bool checked = false;  // only convex domains are checked
  bool connected = false;
  std::size_t components = 0;
  double sigma_length = 0.0;  // length of sigma inside the inner parallel set
  std::size_t squares_meeting = 0;
};

struct VerifyReport {
  std::size_t samples = 0;
  std::size_t samples_in_E = 0;
  double inclusion_fraction = 0.0;
  double fd_max_error = 0.0;
  std::vector<std::size_t> bad_cells;  // gradient not in E
  ContinuityReport continuity;
  bool continuity_exact = false;
  // sup |u| over squares touching the boundary, divided by half their side
  double boundary_sup_ratio = 0.0;
  // max over cell vertices of |u| / (2 d(x, boundary))
  double trace_ratio = 0.0;
  std::vector<ConnectivityCheck> h1;

  bool ok() const;
};

VerifyReport verify_solution(const Solution& sol, std::size_t samples, const std::vector<double>& deltas,
                             std::uint64_t seed = 1, int threads = 1);

// Inner parallel set {d(x, boundary) > delta} of a convex domain given by
// its convex parts, or empty when the union is not convex.
std::optional<std::vector<Vec2>> inner_parallel_convex(const std::vector<Polygon>& parts, double delta);

struct DensityAtRadius {
  double r = 0.0;
  std::array<double, 8> area{};  // indexed by label
  int labels_clearing = 0;       // labels with area > c r^2
};

// Areas of B(x, r) intersected with the level sets of the gradient.
// Throws std::runtime_error("insufficient depth") when an untiled frame
// within the disk is wider than r / 8.
std::vector<DensityAtRadius> density_profile(const Solution& sol, Vec2 x, const std::vector<double>& radii,
                                             double c = 1.0 / 128);

// Exact per-label areas of the cells inside the given convex regions.
std::array<Scalar, 8> label_areas(const std::vector<ConvexCell>& cells, const std::vector<Polygon>& regions);

std::string export_cells(const PiecewiseAffineMap& map);
PiecewiseAffineMap import_cells(const std::string& text);

// ---------------------------------------------------------------- accordion

struct AccordionSpec {
  std::function<double(int)> s;  // s_j for j >= 1
  int frames = 1;
};

AccordionSpec harmonic_accordion(int frames);
// s_j = s_inf + (1 - s_inf) / j
AccordionSpec shifted_accordion(double s_inf, int frames);
AccordionSpec geometric_accordion(double q, int frames);

// Frame n (1-based) occupies s_{2n+1} <= |x|_inf <= s_{2n-1}. Throws
// std::invalid_argument unless s_1 = 1 and s decreases strictly.
PiecewiseAffineMap build_accordion(const AccordionSpec& spec);

// Evaluate a map at p: the first cell whose closure contains it.
std::optional<Vec2> evaluate(const PiecewiseAffineMap& map, const CellIndex& index, Vec2 p, double tol = 1e-12);

// -s_{2n} + 2 sum_{k<2n} (-1)^(k+1) s_k and s_{2n+1} + 2 sum_{k<=2n} (-1)^(k+1) s_k
double accordion_axis_even(const std::function<double(int)>& s, int n);
double accordion_axis_odd(const std::function<double(int)>& s, int n);

// Total length of interfaces between cells with different gradients.
double jump_length(const std::vector<ConvexCell>& cells, double tol = 1e-12);

}  // namespace vpyr
