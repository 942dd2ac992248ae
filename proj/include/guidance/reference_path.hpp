#pragma once

#include <limits>
#include <vector>

#include "guidance/spline_smoothing.hpp"
#include "guidance/world_model.hpp"

namespace guidance {

/// Arc-length parameterized polyline. Beyond either end the first/last
/// segment is extended linearly.
class ReferencePath {
 public:
  /// Consecutive duplicate points are dropped; fewer than two distinct points
  /// throws std::invalid_argument.
  explicit ReferencePath(std::vector<Vec2> points);

  static ReferencePath straight(const Vec2& from, const Vec2& to);
  /// Polyline through the spline sampled every dt over [max(0, t_first), t_last].
  /// A spline that does not
  /// move yields a short segment along the fallback heading.
  static ReferencePath from_spline(const GuidanceSpline& spline, double dt, double fallback_heading);

  double length() const { return cumulative_.back(); }
  Vec2 point(double s) const;
  /// Unit tangent at s.
  Vec2 tangent(double s) const;
  /// Arc length of the closest point to p with s restricted to [s_min, s_max].
  double project(const Vec2& p, double s_min = -std::numeric_limits<double>::infinity(),
                 double s_max = std::numeric_limits<double>::infinity()) const;
  const std::vector<Vec2>& points() const { return points_; }

 private:
  std::size_t segment_index(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

struct ContouringErrors {
  double lag = 0.0;
  double contour = 0.0;
};

/// Tangential and normal components of p - rho(s) in the path frame at s.
ContouringErrors contouring_errors(const Vec2& p, const ReferencePath& reference, double s);

}  // namespace guidance
