#pragma once

#include <optional>
#include <vector>

#include "guidance/guidance_prm.hpp"
#include "guidance/random.hpp"
#include "guidance/spline_smoothing.hpp"
#include "guidance/trajectory_selection.hpp"

namespace guidance {

struct GuidanceConfig {
  PrmConfig prm;
  SmoothingConfig smoothing;
  SelectionWeights selection;
  double v_min = 0.0;
  double heading_halfwidth = 1.0;
  RobotLimits limits;
  int steps = 120;  // N_PRM
  double step = 0.05;

  double horizon() const { return steps * step; }
};

struct GuidanceResult {
  GuidanceGraph graph;
  std::vector<GuidanceSpline> candidates;
  SelectionResult selection;
  GuidanceSpline selected;
  double elapsed_ms = 0.0;
};

/// High-level layer: roadmap construction, trajectory enumeration, smoothing
/// and selection. Keeps the roadmap, trajectory ids and selection of the
/// previous call so identifiers persist across iterations.
class GuidancePlanner {
 public:
  explicit GuidancePlanner(GuidanceConfig config) : config_(std::move(config)) {}

  /// Plans from the robot state (t = 0) to goal. elapsed is the time since
  /// the previous call, used to shift reintroduced nodes. Throws
  /// GoalOccupied or NoTrajectoryFound; the stored state is then unchanged
  /// except that the previous roadmap is dropped.
  GuidanceResult plan(const RobotState& robot, const ObstacleSet& obstacles, const StateSpacePoint& goal,
                      double elapsed, Random& rng);

  /// The last selected spline re-timed to the current instant, if one was
  /// computed and still covers at least min_remaining seconds.
  std::optional<GuidanceSpline> last_guidance(double min_remaining) const;

  /// Advances the clock of the last guidance by dt.
  void age(double dt) { last_age_ += dt; }

  const GuidanceConfig& config() const { return config_; }
  std::optional<int> previous_id() const { return previous_id_; }

 private:
  GuidanceConfig config_;
  std::optional<GuidanceGraph> previous_graph_;
  TrajectoryIdRegistry registry_;
  std::optional<int> previous_id_;
  std::optional<GuidanceSpline> last_spline_;
  double last_age_ = 0.0;
};

}  // namespace guidance
