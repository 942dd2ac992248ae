#include "guidance/reference_path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace guidance {

ReferencePath::ReferencePath(std::vector<Vec2> points) {
  for (const Vec2& p : points) {
    if (points_.empty() || (p - points_.back()).norm() > 1e-9) points_.push_back(p);
  }
  if (points_.size() < 2) throw std::invalid_argument("ReferencePath: need two distinct points");
  cumulative_.resize(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
}

ReferencePath ReferencePath::straight(const Vec2& from, const Vec2& to) { return ReferencePath({from, to}); }

ReferencePath ReferencePath::from_spline(const GuidanceSpline& spline, double dt, double fallback_heading) {
  const double t0 = std::max(0.0, spline.x.front());
  const double duration = std::max(0.0, spline.x.back() - t0);
  const int count = std::max(1, static_cast<int>(std::ceil(duration / dt)));
  std::vector<Vec2> points;
  points.reserve(count + 1);
  for (int i = 0; i <= count; ++i) {
    points.push_back(spline.sample(std::min(spline.x.back(), t0 + i * duration / count)).position);
  }
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += (points[i] - points[i - 1]).norm();
  if (total < 1e-6) {
    const Vec2 start = points.front();
    return ReferencePath({start, start + Vec2(std::cos(fallback_heading), std::sin(fallback_heading))});
  }
  return ReferencePath(std::move(points));
}

std::size_t ReferencePath::segment_index(double s) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::ptrdiff_t i = (it - cumulative_.begin()) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(points_.size()) - 2));
}

Vec2 ReferencePath::point(double s) const {
  const std::size_t i = segment_index(s);
  return points_[i] + (s - cumulative_[i]) * (points_[i + 1] - points_[i]).normalized();
}

Vec2 ReferencePath::tangent(double s) const {
  const std::size_t i = segment_index(s);
  return (points_[i + 1] - points_[i]).normalized();
}

double ReferencePath::project(const Vec2& p, double s_min, double s_max) const {
  double best_s = std::clamp(0.0, s_min, s_max);
  double best_distance = std::numeric_limits<double>::infinity();
  const std::size_t last = points_.size() - 2;
  for (std::size_t i = 0; i <= last; ++i) {
    const double lo = std::max(i == 0 ? -std::numeric_limits<double>::infinity() : cumulative_[i], s_min);
    const double hi = std::min(i == last ? std::numeric_limits<double>::infinity() : cumulative_[i + 1], s_max);
    if (lo > hi) continue;
    const Vec2 direction = (points_[i + 1] - points_[i]).normalized();
    const double s = std::clamp(cumulative_[i] + direction.dot(p - points_[i]), lo, hi);
    const double distance = (points_[i] + (s - cumulative_[i]) * direction - p).squaredNorm();
    if (distance < best_distance) {
      best_distance = distance;
      best_s = s;
    }
  }
  return best_s;
}

ContouringErrors contouring_errors(const Vec2& p, const ReferencePath& reference, double s) {
  const Vec2 offset = p - reference.point(s);
  const Vec2 tangent = reference.tangent(s);
  const Vec2 normal(-tangent.y(), tangent.x());
  return {tangent.dot(offset), normal.dot(offset)};
}

}  // namespace guidance
