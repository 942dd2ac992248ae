#include "guidance/world_model.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "guidance/logging.hpp"

namespace guidance {

RobotInput clamp_input(const RobotInput& input, const RobotLimits& limits) {
  return {std::clamp(input.a, -limits.a_max, limits.a_max),
          std::clamp(input.omega, -limits.omega_max, limits.omega_max)};
}

RobotState robot_step(const RobotState& state, const RobotInput& input, double h,
                      const RobotLimits& limits) {
  const RobotInput u = clamp_input(input, limits);
  if (u.a != input.a || u.omega != input.omega) {
    log_warning("robot_step: input (a={}, omega={}) clamped to limits", input.a, input.omega);
  }
  RobotState next;
  next.x = state.x + state.v * std::cos(state.theta) * h;
  next.y = state.y + state.v * std::sin(state.theta) * h;
  next.theta = normalize_angle(state.theta + u.omega * h);
  next.v = std::clamp(state.v + u.a * h, 0.0, limits.v_max);
  return next;
}

Vec2 ObstaclePrediction::position_at(double t) const {
  if (positions.size() == 1) return positions.front();
  const double u = t / step;
  const int last = steps();
  int k = static_cast<int>(std::floor(u));
  k = std::clamp(k, 0, last - 1);
  const double frac = u - k;
  if (frac == 0.0) return positions[k];
  if (frac == 1.0) return positions[k + 1];
  return positions[k] + frac * (positions[k + 1] - positions[k]);
}

ObstaclePrediction predict_constant_velocity(const Obstacle& obstacle, int steps, double h) {
  ObstaclePrediction prediction;
  prediction.obstacle_id = obstacle.id;
  prediction.step = h;
  prediction.radius = obstacle.radius;
  prediction.positions.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    prediction.positions.push_back(obstacle.center + obstacle.velocity * (k * h));
  }
  return prediction;
}

ObstacleSet make_obstacle_set(const std::vector<Obstacle>& obstacles, int steps, double h,
                              double robot_radius) {
  ObstacleSet set;
  set.robot_radius = robot_radius;
  set.horizon = steps * h;
  set.step = h;
  set.predictions.reserve(obstacles.size());
  for (const auto& obstacle : obstacles) {
    set.predictions.push_back(predict_constant_velocity(obstacle, steps, h));
  }
  return set;
}

double scaled_distance(const StateSpacePoint& a, const StateSpacePoint& b, double time_scale) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dt = (b.t - a.t) * time_scale;
  return std::sqrt(dx * dx + dy * dy + dt * dt);
}

bool point_free(const StateSpacePoint& p, const ObstacleSet& obstacles) {
  for (const auto& prediction : obstacles.predictions) {
    const double inflated = obstacles.robot_radius + prediction.radius;
    if ((p.position() - prediction.position_at(p.t)).squaredNorm() < inflated * inflated) {
      return false;
    }
  }
  return true;
}

double clearance(const StateSpacePoint& p, const ObstacleSet& obstacles) {
  double result = std::numeric_limits<double>::infinity();
  for (const auto& prediction : obstacles.predictions) {
    const double inflated = obstacles.robot_radius + prediction.radius;
    result = std::min(result, (p.position() - prediction.position_at(p.t)).norm() - inflated);
  }
  return result;
}

namespace {

// Axis-aligned box of the obstacle centers over [t0, t1].
void swept_box(const ObstaclePrediction& prediction, double t0, double t1, Vec2& lo, Vec2& hi) {
  lo = prediction.position_at(t0);
  hi = lo;
  const Vec2 end = prediction.position_at(t1);
  lo = lo.cwiseMin(end);
  hi = hi.cwiseMax(end);
  const int first = std::max(0, static_cast<int>(std::ceil(t0 / prediction.step)));
  const int last = std::min(prediction.steps(), static_cast<int>(std::floor(t1 / prediction.step)));
  for (int k = first; k <= last; ++k) {
    lo = lo.cwiseMin(prediction.positions[k]);
    hi = hi.cwiseMax(prediction.positions[k]);
  }
}

}  // namespace

bool segment_free(const StateSpacePoint& a_in, const StateSpacePoint& b_in,
                  const ObstacleSet& obstacles, const SegmentCheck& check) {
  // Canonical orientation makes the sample set identical for (a, b) and (b, a).
  const bool swap = std::tie(b_in.t, b_in.x, b_in.y) < std::tie(a_in.t, a_in.x, a_in.y);
  const StateSpacePoint& a = swap ? b_in : a_in;
  const StateSpacePoint& b = swap ? a_in : b_in;

  const double length = scaled_distance(a, b, check.time_scale);
  const int intervals =
      std::max(1, static_cast<int>(std::ceil(length / check.resolution))) * std::max(1, check.subdivision);

  const Vec2 seg_lo = a.position().cwiseMin(b.position());
  const Vec2 seg_hi = a.position().cwiseMax(b.position());

  thread_local std::vector<const ObstaclePrediction*> relevant;
  relevant.clear();
  for (const auto& prediction : obstacles.predictions) {
    const double inflated = obstacles.robot_radius + prediction.radius;
    Vec2 lo, hi;
    swept_box(prediction, a.t, b.t, lo, hi);
    const Vec2 gap = (lo - seg_hi).cwiseMax(seg_lo - hi).cwiseMax(0.0);
    if (gap.squaredNorm() < inflated * inflated) relevant.push_back(&prediction);
  }
  if (relevant.empty()) return true;

  for (int i = 0; i <= intervals; ++i) {
    const double u = static_cast<double>(i) / intervals;
    const StateSpacePoint p{a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), a.t + u * (b.t - a.t)};
    for (const ObstaclePrediction* prediction : relevant) {
      const double inflated = obstacles.robot_radius + prediction->radius;
      if ((p.position() - prediction->position_at(p.t)).squaredNorm() < inflated * inflated) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace guidance
