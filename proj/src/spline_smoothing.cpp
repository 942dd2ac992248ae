#include "guidance/spline_smoothing.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "guidance/errors.hpp"
#include "guidance/logging.hpp"

namespace guidance {

ControlPointSet sample_control_points(const GeometricTrajectory& trajectory, int num_points) {
  if (num_points < 2) throw std::invalid_argument("sample_control_points: need at least two points");
  const double t0 = trajectory.path.front().t;
  const double horizon = trajectory.path.back().t - t0;
  ControlPointSet set;
  set.dt = horizon / (num_points - 1);
  set.reference.resize(num_points, 2);
  for (int i = 0; i < num_points; ++i) {
    set.reference.row(i) = trajectory.path.position_at_time(t0 + i * set.dt).transpose();
  }
  set.points = set.reference;
  return set;
}

PointMatrix velocity_reference_points(const PointMatrix& reference, double dt, double reference_speed,
                                      const Vec2& initial_velocity, double heading) {
  const Eigen::Index n = reference.rows();
  PointMatrix result(n, 2);
  if (n == 0) return result;
  result.row(0) = reference.row(0);
  Vec2 direction(std::cos(heading), std::sin(heading));
  bool have_direction = false;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Vec2 step = (reference.row(i + 1) - reference.row(i)).transpose();
    if (i == 0 && initial_velocity.norm() > 1e-3) {
      direction = initial_velocity.normalized();
      have_direction = true;
    } else if (step.norm() > 1e-9) {
      direction = step.normalized();
      have_direction = true;
    } else if (!have_direction) {
      direction = Vec2(std::cos(heading), std::sin(heading));
    }
    result.row(i + 1) = result.row(i) + (reference_speed * dt) * direction.transpose();
  }
  return result;
}

ObstacleQuadratic obstacle_quadratic(const Vec2& reference_point, const Vec2& obstacle, double inflated_radius,
                                     ObstacleCostSign sign) {
  const Vec2 a = reference_point - obstacle;
  ObstacleQuadratic q;
  q.hessian = a * a.transpose() / 2.0;
  const double repulsion = sign == ObstacleCostSign::kFlipped ? 1.0 + inflated_radius : -(1.0 + inflated_radius);
  q.linear = repulsion * a - 2.0 * q.hessian * obstacle;
  return q;
}

namespace {

int obstacle_index(int point, double dt, const ObstaclePrediction& prediction) {
  const int k = static_cast<int>(std::lround(point * dt / prediction.step));
  return std::clamp(k, 0, prediction.steps());
}

}  // namespace

double smoothing_cost(const PointMatrix& q, const ControlPointSet& set, const PointMatrix& velocity_points,
                      const ObstacleSet& obstacles, const SmoothingConfig& config) {
  const auto& w = config.weights;
  const Eigen::Index n = q.rows();
  double geometric = (q - set.reference).squaredNorm();
  double velocity = (q - velocity_points).squaredNorm();
  double smooth = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) smooth += (q.row(i - 1) - 2.0 * q.row(i) + q.row(i + 1)).squaredNorm();
  double obstacle = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 qi = q.row(i).transpose();
    for (const auto& prediction : obstacles.predictions) {
      const Vec2& o = prediction.positions[obstacle_index(static_cast<int>(i), set.dt, prediction)];
      const auto term = obstacle_quadratic(set.reference.row(i).transpose(), o,
                                           obstacles.robot_radius + prediction.radius, config.obstacle_sign);
      obstacle += qi.dot(term.hessian * qi) + term.linear.dot(qi);
    }
  }
  return w.geometric * geometric + w.smoothness * smooth + w.obstacle * obstacle + w.velocity * velocity;
}

ControlPointSet optimize_control_points(const ControlPointSet& set, const ObstacleSet& obstacles,
                                        const SmoothingConfig& config, const Vec2& initial_velocity,
                                        double heading) {
  const auto& w = config.weights;
  if (w.geometric < 0 || w.smoothness < 0 || w.obstacle < 0 || w.velocity < 0) {
    throw SingularSystem("smoothing weights must be nonnegative");
  }
  const Eigen::Index n = set.reference.rows();
  const Eigen::Index dim = 2 * n;
  const PointMatrix velocity_points =
      velocity_reference_points(set.reference, set.dt, config.reference_speed, initial_velocity, heading);

  // Half of the stationarity condition: system * q = rhs, q interleaved (x0, y0, x1, y1, ...).
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);

  system.diagonal().array() += w.geometric + w.velocity;
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs.segment<2>(2 * i) += w.geometric * set.reference.row(i).transpose() +
                             w.velocity * velocity_points.row(i).transpose();
  }

  // Second differences couple neighbouring points, identically per axis.
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const Eigen::Index idx[3] = {i - 1, i, i + 1};
    const double coeff[3] = {1.0, -2.0, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const double value = w.smoothness * coeff[r] * coeff[c];
        system(2 * idx[r], 2 * idx[c]) += value;
        system(2 * idx[r] + 1, 2 * idx[c] + 1) += value;
      }
    }
  }

  if (w.obstacle > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (const auto& prediction : obstacles.predictions) {
        const Vec2& o = prediction.positions[obstacle_index(static_cast<int>(i), set.dt, prediction)];
        const auto term = obstacle_quadratic(set.reference.row(i).transpose(), o,
                                             obstacles.robot_radius + prediction.radius, config.obstacle_sign);
        system.block<2, 2>(2 * i, 2 * i) += w.obstacle * term.hessian;
        rhs.segment<2>(2 * i) -= 0.5 * w.obstacle * term.linear;
      }
    }
  }

  const Eigen::LLT<Eigen::MatrixXd> factor(system);
  if (factor.info() != Eigen::Success) {
    throw SingularSystem("smoothing cost is not positive definite; check the geometric weight");
  }
  const Eigen::VectorXd solution = factor.solve(rhs);
  if (!solution.allFinite()) throw SingularSystem("smoothing solve produced non-finite values");

  ControlPointSet result = set;
  for (Eigen::Index i = 0; i < n; ++i) result.points.row(i) = solution.segment<2>(2 * i).transpose();
  return result;
}

SplineSample GuidanceSpline::sample(double t) const {
  const double lo = x.front();
  const double hi = x.back();
  if (t < lo - 1e-12 || t > hi + 1e-12) {
    log_warning("guidance spline sampled at t={} outside [{}, {}]; clamping", t, lo, hi);
  }
  t = std::clamp(t, lo, hi);
  const auto sx = x.evaluate(t);
  const auto sy = y.evaluate(t);
  return {{sx.value, sy.value}, {sx.first, sy.first}, {sx.second, sy.second}};
}

GuidanceSpline fit_cubic_spline(const ControlPointSet& set, const Vec2& initial_velocity, int trajectory_id,
                                std::vector<int> segment_ids) {
  const Eigen::Index n = set.points.rows();
  if (n < 2) throw std::invalid_argument("fit_cubic_spline: need at least two control points");
  std::vector<double> knots(n), xs(n), ys(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    knots[i] = i * set.dt;
    xs[i] = set.points(i, 0);
    ys[i] = set.points(i, 1);
  }
  GuidanceSpline spline;
  spline.x = CubicSpline<double>::clamped_start(knots, xs, initial_velocity.x());
  spline.y = CubicSpline<double>::clamped_start(knots, ys, initial_velocity.y());
  spline.trajectory_id = trajectory_id;
  spline.segment_ids = std::move(segment_ids);
  return spline;
}

GuidanceSpline shift_spline(const GuidanceSpline& spline, double dt) {
  auto shift = [dt](const CubicSpline<double>& axis) {
    std::vector<double> knots = axis.knots();
    for (double& k : knots) k -= dt;
    return CubicSpline<double>(std::move(knots), axis.pieces());
  };
  GuidanceSpline out = spline;
  out.x = shift(spline.x);
  out.y = shift(spline.y);
  return out;
}

GuidanceSpline smooth_trajectory(const GeometricTrajectory& trajectory, const ObstacleSet& obstacles,
                                 const SmoothingConfig& config, const RobotState& robot) {
  const ControlPointSet sampled = sample_control_points(trajectory, config.num_points);
  const ControlPointSet optimized =
      optimize_control_points(sampled, obstacles, config, robot.velocity(), robot.theta);
  return fit_cubic_spline(optimized, robot.velocity(), trajectory.trajectory_id, trajectory.segment_ids);
}

}  // namespace guidance
