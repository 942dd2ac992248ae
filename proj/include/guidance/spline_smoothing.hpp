#pragma once

#include <Eigen/Core>

#include <vector>

#include "guidance/cubic_spline.hpp"
#include "guidance/guidance_prm.hpp"
#include "guidance/world_model.hpp"

namespace guidance {

/// N x 2 matrix, one planar point per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct ControlPointSet {
  PointMatrix points;     // Q, optimized
  PointMatrix reference;  // Q-bar, sampled from the geometric trajectory
  double dt = 0.0;

  Eigen::Index size() const { return points.rows(); }
};

struct SmoothingWeights {
  double geometric = 25.0;
  double smoothness = 10.0;
  double obstacle = 0.5;
  double velocity = 0.01;
};

/// Sign of the (1 + r + r_obs) A part of the obstacle term's linear coefficient:
/// kVerbatim uses -(1 + r + r_obs) A, kFlipped +(1 + r + r_obs) A.
enum class ObstacleCostSign { kVerbatim, kFlipped };

struct SmoothingConfig {
  int num_points = 20;
  SmoothingWeights weights;
  double reference_speed = 2.0;
  ObstacleCostSign obstacle_sign = ObstacleCostSign::kVerbatim;
};

/// Q-bar_i = position of the geometric trajectory at i * dt, dt = T / (n - 1).
ControlPointSet sample_control_points(const GeometricTrajectory& trajectory, int num_points);

/// Points that advance along the reference polyline at exactly the reference
/// speed: Qv_0 = Q-bar_0, Qv_{i+1} = Qv_i + v_ref * dir_i * dt. The first
/// direction is the robot's velocity direction when it is moving; coincident
/// points reuse the previous direction (or the heading when none exists).
PointMatrix velocity_reference_points(const PointMatrix& reference, double dt, double reference_speed,
                                      const Vec2& initial_velocity, double heading);

/// Obstacle quadratic of one control point: Q^T H Q + f^T Q.
struct ObstacleQuadratic {
  Eigen::Matrix2d hessian;
  Vec2 linear;
};

ObstacleQuadratic obstacle_quadratic(const Vec2& reference_point, const Vec2& obstacle, double inflated_radius,
                                     ObstacleCostSign sign);

/// Cost of a candidate point set under the smoothing objective.
double smoothing_cost(const PointMatrix& points, const ControlPointSet& set, const PointMatrix& velocity_points,
                      const ObstacleSet& obstacles, const SmoothingConfig& config);

/// Unique minimizer of the quadratic smoothing cost, from the stationarity
/// condition solved with a Cholesky factorization. Throws SingularSystem when
/// the quadratic form is not positive definite.
ControlPointSet optimize_control_points(const ControlPointSet& set, const ObstacleSet& obstacles,
                                        const SmoothingConfig& config, const Vec2& initial_velocity,
                                        double heading);

struct SplineSample {
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
};

/// Smooth guidance trajectory [0, T] -> R^2 with its topology identifiers.
struct GuidanceSpline {
  CubicSpline<double> x;
  CubicSpline<double> y;
  int trajectory_id = 0;
  std::vector<int> segment_ids;

  double duration() const { return x.back() - x.front(); }
  /// Exact polynomial evaluation; t outside [0, T] is clamped with a warning.
  SplineSample sample(double t) const;
};

/// Per-axis cubic spline through the points at i * dt with the initial
/// velocity imposed at t = 0 and zero curvature at the end.
GuidanceSpline fit_cubic_spline(const ControlPointSet& set, const Vec2& initial_velocity, int trajectory_id,
                                std::vector<int> segment_ids = {});

/// Same curve with time measured from t = dt, i.e. knots moved by -dt.
GuidanceSpline shift_spline(const GuidanceSpline& spline, double dt);

/// sample -> optimize -> fit for one geometric trajectory.
GuidanceSpline smooth_trajectory(const GeometricTrajectory& trajectory, const ObstacleSet& obstacles,
                                 const SmoothingConfig& config, const RobotState& robot);

}  // namespace guidance
