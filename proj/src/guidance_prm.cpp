#include "guidance/guidance_prm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include <fmt/core.h>

#include "guidance/errors.hpp"

namespace guidance {

const GuardNode& GuidanceGraph::guard(int id) const {
  for (const auto& g : guards) {
    if (g.id == id) return g;
  }
  throw std::out_of_range(fmt::format("no guard with id {}", id));
}

const GuardNode& GuidanceGraph::start() const {
  for (const auto& g : guards) {
    if (g.kind == NodeKind::kStart) return g;
  }
  throw std::logic_error("graph has no start guard");
}

const GuardNode& GuidanceGraph::goal() const {
  for (const auto& g : guards) {
    if (g.kind == NodeKind::kGoal) return g;
  }
  throw std::logic_error("graph has no goal guard");
}

PiecewiseTrajectory GuidanceGraph::segment_path(const ConnectorNode& connector, double time_scale) const {
  return PiecewiseTrajectory({guard(connector.guards[0]).state, connector.state, guard(connector.guards[1]).state},
                             time_scale);
}

double SamplingArc::min_radius(double t) const {
  return std::max({0.0, v_min * t, origin.v * t - 0.5 * a_max * t * t});
}

double SamplingArc::max_radius(double t) const {
  return std::min(v_max * t, origin.v * t + 0.5 * a_max * t * t);
}

StateSpacePoint sample_state(const SamplingArc& arc, Random& rng) {
  const double t = arc.horizon() * rng.uniform_open_left();
  const double r_max = arc.max_radius(t);
  const double r_min = std::min(arc.min_radius(t), r_max);
  // Uniform over the annulus sector area.
  const double radius = std::sqrt(rng.uniform(r_min * r_min, r_max * r_max));
  const double bearing = arc.origin.theta + rng.uniform(-arc.heading_halfwidth, arc.heading_halfwidth);
  return {arc.origin.x + radius * std::cos(bearing), arc.origin.y + radius * std::sin(bearing), t};
}

bool connection_valid(const StateSpacePoint& a, const StateSpacePoint& b, double v_max) {
  const double dt = b.t - a.t;
  if (!(dt > 0.0)) return false;
  return (b.position() - a.position()).norm() <= v_max * dt;
}

namespace {

bool time_before(const GuardNode& a, const GuardNode& b) {
  return std::tie(a.state.t, a.id) < std::tie(b.state.t, b.id);
}

bool segment_id_in_use(const GuidanceGraph& graph, int segment_id) {
  return std::any_of(graph.connectors.begin(), graph.connectors.end(),
                     [segment_id](const ConnectorNode& c) { return c.segment_id == segment_id; });
}

}  // namespace

InsertOutcome insert_sample(const StateSpacePoint& x, GuidanceGraph& graph, const ObstacleSet& obstacles,
                            const PrmConfig& config, std::optional<int> reintroduced_segment_id) {
  auto& diag = graph.diagnostics;
  if (!point_free(x, obstacles)) {
    ++diag.discarded_occupied;
    return InsertOutcome::kDiscardedOccupied;
  }

  std::vector<const GuardNode*> visible;
  for (const auto& g : graph.guards) {
    if (segment_free(x, g.state, obstacles, config.uvd.segment)) {
      visible.push_back(&g);
      if (visible.size() > 2) break;
    }
  }

  if (visible.empty()) {
    graph.guards.push_back({graph.next_node_id++, x, NodeKind::kInterior});
    ++diag.guards_added;
    return InsertOutcome::kGuardAdded;
  }
  if (visible.size() != 2) {
    ++diag.discarded_visibility;
    return InsertOutcome::kDiscardedVisibility;
  }

  const GuardNode* first = visible[0];
  const GuardNode* second = visible[1];
  if (time_before(*second, *first)) std::swap(first, second);
  if (!connection_valid(first->state, x, config.v_max) || !connection_valid(x, second->state, config.v_max)) {
    ++diag.discarded_invalid;
    return InsertOutcome::kDiscardedInvalid;
  }

  ConnectorNode node;
  node.id = graph.next_node_id++;
  node.state = x;
  node.guards = {first->id, second->id};
  node.segment_id = reintroduced_segment_id.value_or(0);

  const double time_scale = config.uvd.segment.time_scale;
  const PiecewiseTrajectory path({first->state, x, second->state}, time_scale);
  for (auto& existing : graph.connectors) {
    if (existing.guards != node.guards) continue;
    const PiecewiseTrajectory other = graph.segment_path(existing, time_scale);
    if (!uvd_equivalent(path, other, obstacles, config.uvd)) continue;
    if (path.length() < other.length()) {
      node.segment_id = existing.segment_id;
      existing = node;
      ++diag.connectors_replaced;
      return InsertOutcome::kConnectorReplaced;
    }
    ++diag.discarded_equivalent;
    return InsertOutcome::kDiscardedEquivalent;
  }

  if (!reintroduced_segment_id || segment_id_in_use(graph, *reintroduced_segment_id)) {
    node.segment_id = graph.next_segment_id++;
  }
  graph.next_segment_id = std::max(graph.next_segment_id, node.segment_id + 1);
  graph.connectors.push_back(node);
  ++diag.connectors_added;
  return InsertOutcome::kConnectorAdded;
}

std::vector<ReintroducedNode> reintroduce(const GuidanceGraph& previous, double h, double time_scale) {
  auto shifted = [h](StateSpacePoint p) {
    p.t -= h;
    return p;
  };

  struct Entry {
    int id;
    const GuardNode* guard;
    const ConnectorNode* connector;
  };
  std::vector<Entry> order;
  for (const auto& g : previous.guards) {
    if (g.kind == NodeKind::kInterior) order.push_back({g.id, &g, nullptr});
  }
  for (const auto& c : previous.connectors) order.push_back({c.id, nullptr, &c});
  std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });

  std::vector<ReintroducedNode> nodes;
  for (const Entry& e : order) {
    if (e.guard != nullptr) {
      const StateSpacePoint p = shifted(e.guard->state);
      if (p.t > 0.0) nodes.push_back({p, std::nullopt});
      continue;
    }
    const ConnectorNode& c = *e.connector;
    StateSpacePoint p = shifted(c.state);
    if (p.t <= 0.0) {
      const PiecewiseTrajectory path({shifted(previous.guard(c.guards[0]).state), p,
                                      shifted(previous.guard(c.guards[1]).state)},
                                     time_scale);
      p = path.at(0.5);
      if (p.t <= 0.0) continue;
    }
    nodes.push_back({p, c.segment_id});
  }
  return nodes;
}

GuidanceGraph build_graph(const ObstacleSet& obstacles, const StateSpacePoint& start, const StateSpacePoint& goal,
                          const GuidanceGraph* previous, double h, const SamplingArc& arc,
                          const PrmConfig& config, Random& rng) {
  if (!point_free(goal, obstacles)) {
    throw GoalOccupied(fmt::format("goal ({}, {}, {}) is in collision", goal.x, goal.y, goal.t));
  }

  GuidanceGraph graph;
  if (previous != nullptr) graph.next_segment_id = previous->next_segment_id;
  graph.guards.push_back({graph.next_node_id++, start, NodeKind::kStart});
  graph.guards.push_back({graph.next_node_id++, goal, NodeKind::kGoal});

  const double time_scale = config.uvd.segment.time_scale;
  if (scaled_distance(start, goal, time_scale) < 1e-9) return graph;
  if (config.time_budget_ms && *config.time_budget_ms <= 0.0) return graph;

  const auto started = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    if (!config.time_budget_ms) return false;
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
    return elapsed.count() >= *config.time_budget_ms;
  };

  std::vector<ReintroducedNode> queue;
  if (previous != nullptr) queue = reintroduce(*previous, h, time_scale);

  std::size_t next_reintroduced = 0;
  for (int sample = 0; sample < config.max_samples && !out_of_time(); ++sample) {
    ++graph.diagnostics.samples;
    if (next_reintroduced < queue.size()) {
      const ReintroducedNode& node = queue[next_reintroduced++];
      ++graph.diagnostics.reintroduced;
      insert_sample(node.state, graph, obstacles, config, node.segment_id);
    } else {
      insert_sample(sample_state(arc, rng), graph, obstacles, config);
    }
  }
  return graph;
}

namespace {

struct RawPath {
  std::vector<StateSpacePoint> waypoints;
  std::vector<int> segment_ids;
};

constexpr std::size_t kMaxRawPaths = 64;

void depth_first(const GuidanceGraph& graph, const std::multimap<int, const ConnectorNode*>& outgoing,
                 int guard_id, int goal_id, std::vector<int>& visited, RawPath& current,
                 std::vector<RawPath>& found) {
  if (found.size() >= kMaxRawPaths) return;
  if (guard_id == goal_id) {
    found.push_back(current);
    return;
  }
  const auto [begin, end] = outgoing.equal_range(guard_id);
  for (auto it = begin; it != end; ++it) {
    const ConnectorNode& c = *it->second;
    const int next = c.guards[1];
    if (std::find(visited.begin(), visited.end(), next) != visited.end()) continue;
    visited.push_back(next);
    current.waypoints.push_back(c.state);
    current.waypoints.push_back(graph.guard(next).state);
    current.segment_ids.push_back(c.segment_id);
    depth_first(graph, outgoing, next, goal_id, visited, current, found);
    current.segment_ids.pop_back();
    current.waypoints.pop_back();
    current.waypoints.pop_back();
    visited.pop_back();
  }
}

}  // namespace

EnumerationResult enumerate_trajectories(const GuidanceGraph& graph, const TrajectoryIdRegistry& previous,
                                         const ObstacleSet& obstacles, const PrmConfig& config) {
  const double time_scale = config.uvd.segment.time_scale;
  const GuardNode& start = graph.start();
  const GuardNode& goal = graph.goal();

  std::vector<RawPath> raw;
  if (scaled_distance(start.state, goal.state, time_scale) < 1e-9) {
    raw.push_back({{start.state, goal.state}, {}});
  } else {
    std::multimap<int, const ConnectorNode*> outgoing;
    for (const auto& c : graph.connectors) outgoing.emplace(c.guards[0], &c);
    std::vector<int> visited{start.id};
    RawPath current{{start.state}, {}};
    depth_first(graph, outgoing, start.id, goal.id, visited, current, raw);
  }
  if (raw.empty() && connection_valid(start.state, goal.state, config.v_max) &&
      segment_free(start.state, goal.state, obstacles, config.uvd.segment)) {
    raw.push_back({{start.state, goal.state}, {}});
  }
  if (raw.empty()) throw NoTrajectoryFound("no path from start to goal in the guidance graph");

  std::vector<GeometricTrajectory> candidates;
  candidates.reserve(raw.size());
  for (auto& path : raw) {
    std::sort(path.segment_ids.begin(), path.segment_ids.end());
    candidates.push_back({PiecewiseTrajectory(std::move(path.waypoints), time_scale), std::move(path.segment_ids), 0});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    const double la = a.path.length(), lb = b.path.length();
    return std::tie(la, a.segment_ids) < std::tie(lb, b.segment_ids);
  });

  EnumerationResult result;
  result.registry.next_id = previous.next_id;
  for (auto& candidate : candidates) {
    if (static_cast<int>(result.trajectories.size()) >= config.max_trajectories) break;
    const bool duplicate = std::any_of(result.trajectories.begin(), result.trajectories.end(), [&](const auto& kept) {
      return uvd_equivalent(candidate.path, kept.path, obstacles, config.uvd);
    });
    if (duplicate) continue;
    const std::set<int> key(candidate.segment_ids.begin(), candidate.segment_ids.end());
    const auto match = previous.ids.find(key);
    candidate.trajectory_id = match != previous.ids.end() ? match->second : result.registry.next_id++;
    result.registry.ids[key] = candidate.trajectory_id;
    result.trajectories.push_back(std::move(candidate));
  }
  return result;
}

}  // namespace guidance
