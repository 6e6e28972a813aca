#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vpyr/geometry.hpp"

namespace vpyr {

struct Segment {
  Vec2 a;
  Vec2 b;
  double length() const { return norm(b - a); }
  Vec2 at(double t) const { return a + t * (b - a); }
};

double segment_segment_distance(const Segment& s, const Segment& t);

// Part of s inside a convex counterclockwise polygon.
std::optional<Segment> clip_segment(const Segment& s, const std::vector<Vec2>& poly);

// A finite union of closed segments (zero-length segments are points).
// Construction merges collinear overlaps and splits at crossings, so the
// stored pieces overlap only at endpoints.
class SegmentSet {
 public:
  SegmentSet() = default;
  explicit SegmentSet(std::vector<Segment> segments, double tol = 1e-12);

  const std::vector<Segment>& segments() const { return segs_; }
  bool empty() const { return segs_.empty(); }
  std::size_t size() const { return segs_.size(); }
  double length() const;
  Box bbox() const { return box_; }

  double distance(Vec2 p) const;
  // distance and index of the closest stored segment (lowest index on ties)
  std::pair<double, std::size_t> nearest(Vec2 p) const;
  // Indices of stored segments whose bounding boxes may meet the box.
  std::vector<std::uint32_t> query(const Box& box) const;
  // Number of connected components, two pieces touching when closer than tol.
  std::size_t components(double tol = 1e-9) const;

 private:
  std::vector<Segment> segs_;
  Box box_{};
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> items_;

  void normalize(double tol);
  void build_index();
  int cx(double x) const;
  int cy(double y) const;
};

// d_H(A, B); when one side is empty the distance to it is taken as `diam`.
double hausdorff_distance(const SegmentSet& A, const SegmentSet& B, double diam = 0.0, double tol = 1e-12);
double directed_hausdorff(const SegmentSet& A, const SegmentSet& B, double diam = 0.0, double tol = 1e-12);

// Area of the open rho-neighbourhood divided by 2 rho.
double minkowski_ratio(const SegmentSet& S, double rho);
double tube_area(const SegmentSet& S, double rho);

}  // namespace vpyr
