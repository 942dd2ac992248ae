#include "guidance/guidance_planner.hpp"

#include <chrono>

namespace guidance {

GuidanceResult GuidancePlanner::plan(const RobotState& robot, const ObstacleSet& obstacles,
                                     const StateSpacePoint& goal, double elapsed, Random& rng) {
  const auto started = std::chrono::steady_clock::now();

  SamplingArc arc;
  arc.v_min = config_.v_min;
  arc.v_max = config_.limits.v_max;
  arc.a_max = config_.limits.a_max;
  arc.heading_halfwidth = config_.heading_halfwidth;
  arc.origin = robot;
  arc.steps = config_.steps;
  arc.step = config_.step;

  const StateSpacePoint start{robot.x, robot.y, 0.0};
  const GuidanceGraph* previous = previous_graph_ ? &*previous_graph_ : nullptr;
  GuidanceResult result;
  try {
    result.graph = build_graph(obstacles, start, goal, previous, elapsed, arc, config_.prm, rng);
  } catch (...) {
    previous_graph_.reset();
    throw;
  }
  previous_graph_ = result.graph;

  EnumerationResult enumeration = enumerate_trajectories(result.graph, registry_, obstacles, config_.prm);
  registry_ = std::move(enumeration.registry);

  result.candidates.reserve(enumeration.trajectories.size());
  for (const auto& trajectory : enumeration.trajectories) {
    result.candidates.push_back(smooth_trajectory(trajectory, obstacles, config_.smoothing, robot));
  }
  result.selection = select(result.candidates, previous_id_, config_.selection);
  result.selected = result.candidates[result.selection.chosen_index];

  previous_id_ = result.selection.chosen_id;
  last_spline_ = result.selected;
  last_age_ = 0.0;

  const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - started;
  result.elapsed_ms = took.count();
  return result;
}

std::optional<GuidanceSpline> GuidancePlanner::last_guidance(double min_remaining) const {
  if (!last_spline_ || last_spline_->x.back() - last_age_ < min_remaining) return std::nullopt;
  return shift_spline(*last_spline_, last_age_);
}

}  // namespace guidance
