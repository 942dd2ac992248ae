#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "guidance/random.hpp"
#include "guidance/topology.hpp"
#include "guidance/world_model.hpp"

namespace guidance {

enum class NodeKind { kStart, kGoal, kInterior };

/// Mutually invisible anchor of the roadmap.
struct GuardNode {
  int id = 0;
  StateSpacePoint state;
  NodeKind kind = NodeKind::kInterior;
};

/// Node linking exactly two guards. guards[0] is the earlier guard in time, so
/// guards[0] -> connector -> guards[1] is a time-forward segment. segment_id
/// names the topology class of that segment and survives replanning.
struct ConnectorNode {
  int id = 0;
  StateSpacePoint state;
  std::array<int, 2> guards{};
  int segment_id = 0;
};

struct GraphDiagnostics {
  int samples = 0;
  int reintroduced = 0;
  int guards_added = 0;
  int connectors_added = 0;
  int connectors_replaced = 0;
  int discarded_occupied = 0;
  int discarded_visibility = 0;
  int discarded_invalid = 0;
  int discarded_equivalent = 0;
};

struct GuidanceGraph {
  std::vector<GuardNode> guards;
  std::vector<ConnectorNode> connectors;
  int next_segment_id = 1;
  int next_node_id = 0;
  GraphDiagnostics diagnostics;

  const GuardNode& guard(int id) const;
  const GuardNode& start() const;
  const GuardNode& goal() const;

  /// guards[0] -> connector -> guards[1].
  PiecewiseTrajectory segment_path(const ConnectorNode& connector, double time_scale) const;
};

/// Forward-directed sampling region around the robot, bounded by what is
/// reachable under the speed and acceleration limits.
struct SamplingArc {
  double v_min = 0.0;
  double v_max = 2.5;
  double a_max = 2.0;
  double heading_halfwidth = 1.0;  // rad
  RobotState origin;
  int steps = 120;
  double step = 0.05;

  double horizon() const { return steps * step; }
  /// Radius bounds of reachable positions at time t.
  double min_radius(double t) const;
  double max_radius(double t) const;
};

StateSpacePoint sample_state(const SamplingArc& arc, Random& rng);

/// Dynamic feasibility of the hop a -> b: time advances and the required
/// speed does not exceed v_max.
bool connection_valid(const StateSpacePoint& a, const StateSpacePoint& b, double v_max);

struct PrmConfig {
  int max_samples = 120;
  std::optional<double> time_budget_ms;  // unset: sample budget only
  double v_max = 2.5;
  UvdConfig uvd;
  int max_trajectories = 8;
};

enum class InsertOutcome {
  kGuardAdded,
  kConnectorAdded,
  kConnectorReplaced,
  kDiscardedOccupied,
  kDiscardedVisibility,
  kDiscardedInvalid,
  kDiscardedEquivalent,
};

/// One iteration of the visibility-PRM loop body for sample x.
InsertOutcome insert_sample(const StateSpacePoint& x, GuidanceGraph& graph, const ObstacleSet& obstacles,
                            const PrmConfig& config, std::optional<int> reintroduced_segment_id = {});

/// Node from the previous iteration, shifted back in time.
struct ReintroducedNode {
  StateSpacePoint state;
  std::optional<int> segment_id;
};

/// Interior guards and connectors in creation (id) order, so each node meets
/// the guards it met when it was created. Times are reduced by
/// h; a connector whose time drops to zero or below is replaced by the
/// midpoint of its (shifted) segment path and keeps its segment id.
std::vector<ReintroducedNode> reintroduce(const GuidanceGraph& previous, double h, double time_scale);

/// Builds the roadmap from start (t = 0) to goal (t = T). Nodes of previous
/// are reintroduced before fresh samples are drawn from arc. Throws
/// GoalOccupied when the goal is in collision.
GuidanceGraph build_graph(const ObstacleSet& obstacles, const StateSpacePoint& start,
                          const StateSpacePoint& goal, const GuidanceGraph* previous, double h,
                          const SamplingArc& arc, const PrmConfig& config, Random& rng);

struct GeometricTrajectory {
  PiecewiseTrajectory path;
  std::vector<int> segment_ids;  // sorted, unique
  int trajectory_id = 0;
};

/// Segment-id set -> trajectory id of the previous iteration.
struct TrajectoryIdRegistry {
  std::map<std::set<int>, int> ids;
  int next_id = 1;
};

struct EnumerationResult {
  std::vector<GeometricTrajectory> trajectories;
  TrajectoryIdRegistry registry;  // mapping for the next iteration
};

/// Depth-first search over the roadmap from start to goal. Found paths are
/// ordered by length; UVD-equivalent duplicates of a shorter path are
/// dropped and at most config.max_trajectories are kept. Trajectory ids are
/// reused when the segment-id set matches a previous trajectory exactly.
/// Throws NoTrajectoryFound when start and goal are not connected.
EnumerationResult enumerate_trajectories(const GuidanceGraph& graph, const TrajectoryIdRegistry& previous,
                                         const ObstacleSet& obstacles, const PrmConfig& config);

}  // namespace guidance
