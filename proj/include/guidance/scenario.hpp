#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "guidance/guidance_planner.hpp"
#include "guidance/mpcc_planner.hpp"
#include "guidance/random.hpp"
#include "guidance/reference_path.hpp"
#include "guidance/world_model.hpp"

namespace guidance {

struct PedestrianSpec {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

/// Uniform perturbation of the listed pedestrians' start positions.
struct SpawnJitter {
  double x = 0.0;
  double y = 0.0;
};

struct RandomSpawn {
  int count = 0;
  double x_min = 4.0;
  double x_max = 20.0;
  double y_max = 2.5;
  double speed_min = 1.2;
  double speed_max = 1.8;
  double min_robot_distance = 2.0;
};

struct GoalSearch {
  double ring_step = 0.1;
  double max_radius = 2.0;
  int max_halvings = 3;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double x_start = 0.0;
  double x_end = 24.0;
  double width = 6.0;
  double reference_y = 0.0;
  RobotState robot_start{0.0, 0.0, 0.0, 2.0};
  double robot_radius = 0.325;
  double obstacle_radius = 0.3;
  double reference_speed = 2.0;
  std::vector<PedestrianSpec> pedestrians;
  SpawnJitter jitter;
  RandomSpawn random;
  GuidanceConfig guidance;
  MpccSettings mpcc;
  MpccWeights guided_weights = MpccWeights::guided();
  MpccWeights baseline_weights = MpccWeights::baseline();
  GoalSearch goal_search;
  double timeout = 30.0;

  ReferencePath reference() const;
};

/// Parses a JSON scenario; missing keys keep their defaults. Throws
/// ConfigError on malformed input or invalid values.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

enum class PlannerKind { kGuided, kBaseline };

const char* to_string(PlannerKind kind);
PlannerKind parse_planner(const std::string& name);

/// Pedestrians of one episode. Listed pedestrians come first (jitter x, then
/// y, per pedestrian), then random ones (x, y, heading, speed per draw,
/// redrawn while closer than min_robot_distance to the robot start).
std::vector<Obstacle> spawn_pedestrians(const ScenarioConfig& config, Random& rng);

/// Goal at arc length reference_speed * T ahead of the robot's projection at
/// time T. An occupied goal is moved to the nearest free point on rings of
/// growing radius; if none exists T is halved. Throws GoalUnreachable.
StateSpacePoint plan_goal(const RobotState& state, const ReferencePath& reference, const ObstacleSet& obstacles,
                          double horizon, double reference_speed, const GoalSearch& search = {});

struct StepRecord {
  int step = 0;
  double time = 0.0;
  RobotState state;  // at the start of the step
  RobotInput input;  // applied during the step
  std::optional<int> selected_id;
  std::vector<std::pair<int, double>> candidate_costs;
  SolveStatus mpcc_status = SolveStatus::kInfeasible;
  int mpcc_iterations = 0;
  bool braking = false;
  bool guidance_fallback = false;
  std::vector<Obstacle> obstacles;  // at the start of the step
  std::optional<GuidanceSpline> spline;
  double high_level_ms = 0.0;
  double mpcc_ms = 0.0;
  double total_ms = 0.0;
};

/// Roadmap and candidates of one step, kept only when requested.
struct GuidanceSnapshot {
  int step = 0;
  GuidanceGraph graph;
  std::vector<GuidanceSpline> candidates;
  int selected_id = 0;
};

struct EpisodeMetrics {
  double task_duration = 0.0;
  bool collision_flag = false;
  int collision_count = 0;
  bool timeout_flag = false;
  int steps = 0;
  double mean_compute_ms = 0.0;
  double std_compute_ms = 0.0;
  double mean_high_level_ms = 0.0;
  double std_high_level_ms = 0.0;
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  std::vector<GuidanceSnapshot> snapshots;
};

/// Closed-loop state of one episode.
class Episode {
 public:
  Episode(const ScenarioConfig& config, std::uint64_t seed, PlannerKind planner, bool keep_snapshots = false);

  /// One control period; returns the record of the step.
  const StepRecord& step();
  bool done() const { return finished_ || timed_out_; }

  const RobotState& robot() const { return robot_; }
  const std::vector<Obstacle>& pedestrians() const { return pedestrians_; }
  double time() const { return step_index_ * config_.mpcc.step; }
  EpisodeMetrics metrics() const;
  EpisodeLog& log() { return log_; }

 private:
  MpccProblem make_problem(const ObstacleSet& obstacles) const;

  const ScenarioConfig& config_;
  PlannerKind planner_;
  bool keep_snapshots_;
  Random rng_;
  ReferencePath reference_;
  RobotState robot_;
  std::vector<Obstacle> pedestrians_;
  std::vector<char> overlapping_;
  GuidancePlanner guidance_;
  std::optional<MpccSolution> previous_solution_;
  int step_index_ = 0;
  int collisions_ = 0;
  bool finished_ = false;
  bool timed_out_ = false;
  EpisodeLog log_;
};

struct EpisodeResult {
  PlannerKind planner = PlannerKind::kGuided;
  std::uint64_t seed = 0;
  EpisodeMetrics metrics;
  EpisodeLog log;
};

EpisodeResult run_episode(const ScenarioConfig& config, std::uint64_t seed, PlannerKind planner,
                          bool keep_snapshots = false);

struct PlannerSummary {
  PlannerKind planner = PlannerKind::kGuided;
  int episodes = 0;
  double mean_duration = 0.0;
  double std_duration = 0.0;
  int collision_episodes = 0;
  int timeouts = 0;
  double mean_compute_ms = 0.0;
  double std_compute_ms = 0.0;
  double mean_high_level_ms = 0.0;
  double std_high_level_ms = 0.0;
};

struct BatchResult {
  std::vector<EpisodeResult> episodes;  // planner-major, seeds in the given order
  std::vector<PlannerSummary> summaries;
};

/// Runs every (planner, seed) pair on up to jobs threads. Results do not
/// depend on jobs. keep_logs = false drops per-step logs after the metrics
/// are computed.
BatchResult run_batch(const ScenarioConfig& config, const std::vector<std::uint64_t>& seeds,
                      const std::vector<PlannerKind>& planners, int jobs = 1, bool keep_logs = true,
                      bool keep_snapshots = false);

/// Mean and population standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Aggregates episodes of one planner (every episode must share it).
PlannerSummary summarize(PlannerKind planner, const std::vector<EpisodeMetrics>& episodes);

}  // namespace guidance
