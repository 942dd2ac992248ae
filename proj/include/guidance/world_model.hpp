#pragma once

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace guidance {

using Vec2 = Eigen::Vector2d;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar angle) {
  const Scalar two_pi = Scalar(2.0 * M_PI);
  angle = std::fmod(angle, two_pi);
  if (angle <= -Scalar(M_PI)) angle += two_pi;
  if (angle > Scalar(M_PI)) angle -= two_pi;
  return angle;
}

struct RobotLimits {
  double v_max = 2.5;      // m/s
  double a_max = 2.0;      // m/s^2
  double omega_max = 2.0;  // rad/s
};

/// Unicycle state: planar position, heading and forward speed.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return v * Vec2(std::cos(theta), std::sin(theta)); }
};

struct RobotInput {
  double a = 0.0;      // longitudinal acceleration
  double omega = 0.0;  // yaw rate
};

RobotInput clamp_input(const RobotInput& input, const RobotLimits& limits);

/// One explicit-Euler step of the unicycle. Position integrates the current
/// heading and speed; the speed is then clamped to [0, v_max]. Out-of-range
/// inputs are clamped and reported as a warning.
RobotState robot_step(const RobotState& state, const RobotInput& input, double h,
                      const RobotLimits& limits = {});

struct Obstacle {
  int id = 0;
  Vec2 center = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double radius = 0.3;
};

/// Predicted disc centers o_0 ... o_N at a fixed step.
struct ObstaclePrediction {
  int obstacle_id = 0;
  std::vector<Vec2> positions;
  double step = 0.05;
  double radius = 0.3;

  int steps() const { return static_cast<int>(positions.size()) - 1; }

  /// Linear interpolation between samples; beyond the last sample the final
  /// segment is extrapolated (exact for constant-velocity predictions).
  Vec2 position_at(double t) const;
};

ObstaclePrediction predict_constant_velocity(const Obstacle& obstacle, int steps, double h);

/// A point of the space-time state space R^2 x [0, T].
struct StateSpacePoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const StateSpacePoint&) const = default;
};

/// Moving obstacles as seen by the planner: tubes through the state space.
struct ObstacleSet {
  std::vector<ObstaclePrediction> predictions;
  double robot_radius = 0.325;
  double horizon = 6.0;
  double step = 0.05;
};

ObstacleSet make_obstacle_set(const std::vector<Obstacle>& obstacles, int steps, double h,
                              double robot_radius);

/// Discretization of straight segments through the state space. Distances use
/// the (x, y, t * time_scale) metric so time and space are comparable.
struct SegmentCheck {
  double resolution = 0.1;
  double time_scale = 2.0;
  int subdivision = 1;  // multiplies the number of sampled intervals
};

double scaled_distance(const StateSpacePoint& a, const StateSpacePoint& b, double time_scale);

bool point_free(const StateSpacePoint& p, const ObstacleSet& obstacles);

/// True iff every sample along a->b (endpoints included, spacing at most
/// resolution / subdivision) is collision-free. Symmetric in a and b.
bool segment_free(const StateSpacePoint& a, const StateSpacePoint& b,
                  const ObstacleSet& obstacles, const SegmentCheck& check = {});

/// Minimum clearance (distance minus inflated radius) over all obstacles.
double clearance(const StateSpacePoint& p, const ObstacleSet& obstacles);

}  // namespace guidance
