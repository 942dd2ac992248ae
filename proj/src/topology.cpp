#include "guidance/topology.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/core.h>

#include "guidance/errors.hpp"

namespace guidance {

PiecewiseTrajectory::PiecewiseTrajectory(std::vector<StateSpacePoint> waypoints, double time_scale)
    : waypoints_(std::move(waypoints)), time_scale_(time_scale) {
  if (waypoints_.size() < 2) {
    throw std::invalid_argument("PiecewiseTrajectory needs at least two waypoints");
  }
  cumulative_.reserve(waypoints_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    if (waypoints_[i].t < waypoints_[i - 1].t) {
      throw std::invalid_argument("PiecewiseTrajectory waypoints must be nondecreasing in time");
    }
    cumulative_.push_back(cumulative_.back() + scaled_distance(waypoints_[i - 1], waypoints_[i], time_scale_));
  }
}

StateSpacePoint PiecewiseTrajectory::at(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const double total = cumulative_.back();
  if (total <= 0.0) return waypoints_.front();
  if (s == 1.0) return waypoints_.back();
  const double target = s * total;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t i = std::clamp<std::size_t>(it - cumulative_.begin(), 1, cumulative_.size() - 1);
  const double piece = cumulative_[i] - cumulative_[i - 1];
  const double u = piece > 0.0 ? (target - cumulative_[i - 1]) / piece : 0.0;
  const auto& a = waypoints_[i - 1];
  const auto& b = waypoints_[i];
  return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), a.t + u * (b.t - a.t)};
}

Vec2 PiecewiseTrajectory::position_at_time(double t) const {
  if (t <= waypoints_.front().t) return waypoints_.front().position();
  if (t >= waypoints_.back().t) return waypoints_.back().position();
  const auto it = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                                   [](double value, const StateSpacePoint& p) { return value < p.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double span = b.t - a.t;
  const double u = span > 0.0 ? (t - a.t) / span : 1.0;
  return a.position() + u * (b.position() - a.position());
}

namespace {

void check_endpoints(const PiecewiseTrajectory& t1, const PiecewiseTrajectory& t2, double time_scale) {
  constexpr double kTolerance = 1e-6;
  const double start_gap = scaled_distance(t1.front(), t2.front(), time_scale);
  const double end_gap = scaled_distance(t1.back(), t2.back(), time_scale);
  if (start_gap > kTolerance || end_gap > kTolerance) {
    throw EndpointMismatch(fmt::format("trajectories do not share endpoints (start gap {}, end gap {})",
                                       start_gap, end_gap));
  }
}

}  // namespace

bool uvd_equivalent(const PiecewiseTrajectory& t1, const PiecewiseTrajectory& t2,
                    const ObstacleSet& obstacles, const UvdConfig& config) {
  check_endpoints(t1, t2, config.segment.time_scale);
  const int n = std::max(2, config.num_samples);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    if (!segment_free(t1.at(s), t2.at(s), obstacles, config.segment)) return false;
  }
  return true;
}

bool uvd_oracle(const PiecewiseTrajectory& t1, const PiecewiseTrajectory& t2,
                const ObstacleSet& obstacles, const UvdConfig& config) {
  constexpr int kRefinement = 20;
  UvdConfig fine = config;
  fine.num_samples = (std::max(2, config.num_samples) - 1) * kRefinement + 1;
  fine.segment.subdivision = std::max(1, config.segment.subdivision) * kRefinement;
  return uvd_equivalent(t1, t2, obstacles, fine);
}

}  // namespace guidance
