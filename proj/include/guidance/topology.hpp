#pragma once

#include <vector>

#include "guidance/world_model.hpp"

namespace guidance {

/// Piecewise-linear path through the state space, parameterized on [0, 1] by
/// normalized arc length in the (x, y, t * time_scale) metric.
class PiecewiseTrajectory {
 public:
  PiecewiseTrajectory(std::vector<StateSpacePoint> waypoints, double time_scale);

  StateSpacePoint at(double s) const;
  /// Position at time t, interpolating linearly between waypoints (t clamped).
  Vec2 position_at_time(double t) const;

  double length() const { return cumulative_.back(); }
  double time_scale() const { return time_scale_; }
  const std::vector<StateSpacePoint>& waypoints() const { return waypoints_; }
  const StateSpacePoint& front() const { return waypoints_.front(); }
  const StateSpacePoint& back() const { return waypoints_.back(); }

 private:
  std::vector<StateSpacePoint> waypoints_;
  std::vector<double> cumulative_;
  double time_scale_;
};

struct UvdConfig {
  int num_samples = 20;
  SegmentCheck segment;
};

/// Uniform visibility deformation test: the trajectories are equivalent iff
/// the connecting segment t1(s)->t2(s) is collision-free at num_samples
/// equally spaced s in [0, 1]. Throws EndpointMismatch when the endpoints
/// differ by more than 1e-6 in the scaled metric.
bool uvd_equivalent(const PiecewiseTrajectory& t1, const PiecewiseTrajectory& t2,
                    const ObstacleSet& obstacles, const UvdConfig& config = {});

/// Same test on a 20x refined grid. The refined s-grid and segment grids
/// contain the coarse ones, so a coarse "distinct" is never overturned.
bool uvd_oracle(const PiecewiseTrajectory& t1, const PiecewiseTrajectory& t2,
                const ObstacleSet& obstacles, const UvdConfig& config = {});

}  // namespace guidance
