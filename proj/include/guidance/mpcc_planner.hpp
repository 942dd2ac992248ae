#pragma once

#include <optional>
#include <span>
#include <vector>

#include "guidance/reference_path.hpp"
#include "guidance/spline_smoothing.hpp"
#include "guidance/world_model.hpp"

namespace guidance {

struct MpccWeights {
  double contour = 0.5;
  double lag = 0.01;
  double velocity = 0.3;
  double acceleration = 0.05;
  double yaw_rate = 0.05;

  static MpccWeights guided() { return {}; }
  static MpccWeights baseline() {
    MpccWeights w;
    w.contour = 0.01;
    return w;
  }
};

/// {p : normal . p <= offset} for the robot position at one stage.
struct HalfspaceConstraint {
  Vec2 normal = Vec2::UnitX();
  double offset = 0.0;
  int stage = 0;
  int obstacle_id = 0;

  double violation(const Vec2& p) const { return normal.dot(p) - offset; }
};

/// Tangent half-space separating the robot from the disc of radius
/// robot_radius + obstacle_radius around the obstacle:
/// A = (o - p) / |o - p|, b = A^T o - (r + r_obs). When the centers coincide
/// p is moved by 1e-6 along the heading.
HalfspaceConstraint linearize_obstacle(const Vec2& robot, const Vec2& obstacle, double robot_radius,
                                       double obstacle_radius, double heading = 0.0);

struct MpccSettings {
  int horizon = 40;
  double step = 0.05;
  int max_iterations = 10;
  double step_tolerance = 1e-4;
  double trust_radius = 0.5;         // per position coordinate and iteration
  double slack_penalty = 1e3;
  double constraint_backoff = 1e-3;  // tightening of obstacle rows inside the subproblem
  double feasibility_tolerance = 1e-6;
  RobotLimits limits;
};

struct MpccProblem {
  RobotState initial;
  ReferencePath reference = ReferencePath::straight(Vec2::Zero(), Vec2::UnitX());
  std::vector<double> reference_speed;  // v-bar_k for k = 0..N; a single value is broadcast
  ObstacleSet obstacles;
  MpccWeights weights;
};

enum class SolveStatus { kConverged, kMaxIterations, kInfeasible };

const char* to_string(SolveStatus status);

struct MpccSolution {
  std::vector<RobotState> states;  // N + 1
  std::vector<RobotInput> inputs;  // N
  std::vector<double> progress;    // projected arc length per stage
  std::vector<double> stage_costs;
  std::vector<HalfspaceConstraint> constraints;  // the constraints this iterate was checked against
  SolveStatus status = SolveStatus::kInfeasible;
  int iterations = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double wall_time_ms = 0.0;

  bool feasible() const { return status != SolveStatus::kInfeasible; }
};

std::vector<RobotState> rollout(const RobotState& initial, std::span<const RobotInput> inputs, double h,
                                const RobotLimits& limits);

/// Arc-length projection of each state, each stage searched in a window
/// around the previous one.
std::vector<double> project_progress(const std::vector<RobotState>& states, const ReferencePath& reference);

/// Sum over stages of w_c e_c^2 + w_l e_l^2 + w_v (v_k - vbar_k)^2 plus
/// w_a a_k^2 + w_w omega_k^2 over inputs.
double mpcc_objective(const std::vector<RobotState>& states, std::span<const RobotInput> inputs,
                      const std::vector<double>& progress, const MpccProblem& problem,
                      std::vector<double>* stage_costs = nullptr);

/// Inputs tracking the spline's speed and heading at the stage times k * h
/// (time zero is the current instant), clamped to the limits.
std::vector<RobotInput> warm_start_from_spline(const GuidanceSpline& spline, const RobotState& initial,
                                               const MpccSettings& settings);

/// Previous inputs shifted by one stage, the last one repeated.
std::vector<RobotInput> warm_start_from_solution(const MpccSolution& previous, const MpccSettings& settings);

/// Sequential convexification with linearized obstacle half-spaces. Returns
/// the lowest-cost feasible iterate, or the last iterate flagged infeasible.
MpccSolution solve(const MpccProblem& problem, const MpccSettings& settings, std::span<const RobotInput> warm_start);

/// Full deceleration along the current heading.
RobotInput braking_input(const RobotLimits& limits);

}  // namespace guidance
