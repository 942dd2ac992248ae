#include "guidance/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/core.h>

#include "guidance/errors.hpp"
#include "guidance/logging.hpp"
#include "json.hpp"

namespace guidance {

using nlohmann::json;

ReferencePath ScenarioConfig::reference() const {
  return ReferencePath::straight({x_start, reference_y}, {x_end, reference_y});
}

namespace {

template <typename T>
void read(const json& node, const char* key, T& value) {
  if (!node.is_object()) throw ConfigError(fmt::format("expected an object around '{}'", key));
  const auto it = node.find(key);
  if (it == node.end() || it->is_null()) return;
  try {
    value = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

const json& child(const json& node, const char* key) {
  static const json empty = json::object();
  const auto it = node.find(key);
  if (it == node.end() || it->is_null()) return empty;
  if (!it->is_object()) throw ConfigError(fmt::format("'{}' must be an object", key));
  return *it;
}

Vec2 read_vec(const json& node, const char* key, const Vec2& fallback) {
  const auto it = node.find(key);
  if (it == node.end()) return fallback;
  if (!it->is_array() || it->size() != 2) throw ConfigError(fmt::format("'{}' must be [x, y]", key));
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

void read_mpcc_weights(const json& node, MpccWeights& w) {
  read(node, "contour", w.contour);
  read(node, "lag", w.lag);
  read(node, "velocity", w.velocity);
  read(node, "acceleration", w.acceleration);
  read(node, "yaw_rate", w.yaw_rate);
}

void validate(const ScenarioConfig& c) {
  auto require = [](bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
  };
  require(c.x_end > c.x_start, "road.x_end must exceed road.x_start");
  require(c.width > 0.0, "road.width must be positive");
  require(c.robot_radius > 0.0 && c.obstacle_radius > 0.0, "radii must be positive");
  require(c.reference_speed > 0.0, "reference_speed must be positive");
  require(c.random.count >= 0, "random.count must be nonnegative");
  require(c.random.x_max >= c.random.x_min && c.random.y_max >= 0.0, "random spawn region is empty");
  require(c.random.speed_max >= c.random.speed_min && c.random.speed_min >= 0.0, "bad random speed range");
  require(c.guidance.steps >= 1 && c.mpcc.horizon >= 1, "horizons must be positive");
  require(c.mpcc.step > 0.0 && c.guidance.step > 0.0, "step must be positive");
  require(c.mpcc.horizon * c.mpcc.step <= c.guidance.steps * c.guidance.step + 1e-12,
          "the MPCC horizon must not exceed the guidance horizon");
  require(c.guidance.smoothing.num_points >= 2, "smoothing.num_points must be at least 2");
  require(c.guidance.prm.max_samples >= 0 && c.guidance.prm.max_trajectories >= 1, "bad PRM limits");
  require(c.guidance.prm.uvd.num_samples >= 2, "uvd_samples must be at least 2");
  require(c.guidance.selection.discount > 0.0 && c.guidance.selection.discount <= 1.0,
          "selection discount must be in (0, 1]");
  const auto& w = c.guidance.smoothing.weights;
  require(w.geometric >= 0 && w.smoothness >= 0 && w.obstacle >= 0 && w.velocity >= 0,
          "smoothing weights must be nonnegative");
  require(c.timeout > 0.0, "timeout must be positive");
  require(c.goal_search.ring_step > 0.0 && c.goal_search.max_halvings >= 0, "bad goal search");
  require(c.robot_start.v >= 0.0 && c.robot_start.v <= c.mpcc.limits.v_max, "start speed outside [0, v_max]");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw ConfigError("scenario must be a JSON object");

  ScenarioConfig c;
  try {
    read(root, "name", c.name);
    read(root, "reference_speed", c.reference_speed);
    read(root, "robot_radius", c.robot_radius);
    read(root, "obstacle_radius", c.obstacle_radius);
    read(root, "timeout", c.timeout);

    const json& road = child(root, "road");
    read(road, "x_start", c.x_start);
    read(road, "x_end", c.x_end);
    read(road, "width", c.width);
    read(road, "reference_y", c.reference_y);

    c.robot_start.x = c.x_start;
    c.robot_start.y = c.reference_y;
    c.robot_start.v = c.reference_speed;
    const json& robot = child(root, "robot");
    read(robot, "x", c.robot_start.x);
    read(robot, "y", c.robot_start.y);
    read(robot, "theta", c.robot_start.theta);
    read(robot, "v", c.robot_start.v);

    const json& limits = child(root, "limits");
    read(limits, "v_max", c.mpcc.limits.v_max);
    read(limits, "a_max", c.mpcc.limits.a_max);
    read(limits, "omega_max", c.mpcc.limits.omega_max);
    c.guidance.limits = c.mpcc.limits;
    c.guidance.prm.v_max = c.mpcc.limits.v_max;

    const json& peds = child(root, "pedestrians");
    if (const auto it = peds.find("listed"); it != peds.end()) {
      if (!it->is_array()) throw ConfigError("pedestrians.listed must be an array");
      for (const json& p : *it) {
        c.pedestrians.push_back({read_vec(p, "position", Vec2::Zero()), read_vec(p, "velocity", Vec2::Zero())});
      }
    }
    const json& jitter = child(peds, "jitter");
    read(jitter, "x", c.jitter.x);
    read(jitter, "y", c.jitter.y);
    const json& random = child(peds, "random");
    read(random, "count", c.random.count);
    read(random, "x_min", c.random.x_min);
    read(random, "x_max", c.random.x_max);
    read(random, "y_max", c.random.y_max);
    read(random, "speed_min", c.random.speed_min);
    read(random, "speed_max", c.random.speed_max);
    read(random, "min_robot_distance", c.random.min_robot_distance);

    const json& horizon = child(root, "horizon");
    read(horizon, "prm_steps", c.guidance.steps);
    read(horizon, "mpcc_steps", c.mpcc.horizon);
    read(horizon, "step", c.mpcc.step);
    c.guidance.step = c.mpcc.step;

    const json& prm = child(root, "prm");
    read(prm, "max_samples", c.guidance.prm.max_samples);
    read(prm, "max_trajectories", c.guidance.prm.max_trajectories);
    read(prm, "heading_halfwidth", c.guidance.heading_halfwidth);
    read(prm, "v_min", c.guidance.v_min);
    read(prm, "uvd_samples", c.guidance.prm.uvd.num_samples);
    read(prm, "resolution", c.guidance.prm.uvd.segment.resolution);
    double budget = -1.0;
    read(prm, "time_budget_ms", budget);
    if (budget >= 0.0) c.guidance.prm.time_budget_ms = budget;
    c.guidance.prm.uvd.segment.time_scale = c.reference_speed;

    const json& smoothing = child(root, "smoothing");
    read(smoothing, "num_points", c.guidance.smoothing.num_points);
    read(smoothing, "geometric", c.guidance.smoothing.weights.geometric);
    read(smoothing, "smoothness", c.guidance.smoothing.weights.smoothness);
    read(smoothing, "obstacle", c.guidance.smoothing.weights.obstacle);
    read(smoothing, "velocity", c.guidance.smoothing.weights.velocity);
    std::string sign = "verbatim";
    read(smoothing, "obstacle_sign", sign);
    if (sign == "verbatim") {
      c.guidance.smoothing.obstacle_sign = ObstacleCostSign::kVerbatim;
    } else if (sign == "flipped") {
      c.guidance.smoothing.obstacle_sign = ObstacleCostSign::kFlipped;
    } else {
      throw ConfigError("smoothing.obstacle_sign must be 'verbatim' or 'flipped'");
    }
    c.guidance.smoothing.reference_speed = c.reference_speed;

    const json& selection = child(root, "selection");
    auto& s = c.guidance.selection;
    read(selection, "length", s.length);
    read(selection, "velocity", s.velocity);
    read(selection, "acceleration", s.acceleration);
    read(selection, "consistency", s.consistency);
    read(selection, "discount", s.discount);
    read(selection, "num_samples", s.num_samples);
    read(selection, "per_sample_consistency", s.per_sample_consistency);
    s.reference_speed = c.reference_speed;

    const json& mpcc = child(root, "mpcc");
    read(mpcc, "max_iterations", c.mpcc.max_iterations);
    read(mpcc, "step_tolerance", c.mpcc.step_tolerance);
    read(mpcc, "trust_radius", c.mpcc.trust_radius);
    read(mpcc, "slack_penalty", c.mpcc.slack_penalty);
    read_mpcc_weights(child(mpcc, "guided"), c.guided_weights);
    read_mpcc_weights(child(mpcc, "baseline"), c.baseline_weights);

    const json& goal = child(root, "goal_search");
    read(goal, "ring_step", c.goal_search.ring_step);
    read(goal, "max_radius", c.goal_search.max_radius);
    read(goal, "max_halvings", c.goal_search.max_halvings);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad scenario: {}", e.what()));
  }
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read scenario file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

const char* to_string(PlannerKind kind) { return kind == PlannerKind::kGuided ? "guided" : "baseline"; }

PlannerKind parse_planner(const std::string& name) {
  if (name == "guided") return PlannerKind::kGuided;
  if (name == "baseline") return PlannerKind::kBaseline;
  throw ConfigError(fmt::format("unknown planner '{}' (expected guided or baseline)", name));
}

std::vector<Obstacle> spawn_pedestrians(const ScenarioConfig& config, Random& rng) {
  std::vector<Obstacle> pedestrians;
  int id = 0;
  for (const auto& spec : config.pedestrians) {
    Obstacle o;
    o.id = id++;
    const double dx = rng.uniform(-config.jitter.x, config.jitter.x);
    const double dy = rng.uniform(-config.jitter.y, config.jitter.y);
    o.center = spec.position + Vec2(dx, dy);
    o.velocity = spec.velocity;
    o.radius = config.obstacle_radius;
    pedestrians.push_back(o);
  }
  const auto& r = config.random;
  const Vec2 robot = config.robot_start.position();
  for (int i = 0; i < r.count; ++i) {
    Obstacle o;
    o.id = id++;
    o.radius = config.obstacle_radius;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double x = rng.uniform(r.x_min, r.x_max);
      const double y = rng.uniform(-r.y_max, r.y_max);
      const double heading = rng.uniform(-M_PI, M_PI);
      const double speed = rng.uniform(r.speed_min, r.speed_max);
      o.center = {x, y};
      o.velocity = speed * Vec2(std::cos(heading), std::sin(heading));
      if ((o.center - robot).norm() >= r.min_robot_distance) break;
    }
    pedestrians.push_back(o);
  }
  return pedestrians;
}

StateSpacePoint plan_goal(const RobotState& state, const ReferencePath& reference, const ObstacleSet& obstacles,
                          double horizon, double reference_speed, const GoalSearch& search) {
  const double s0 = reference.project(state.position());
  double T = horizon;
  for (int halving = 0; halving <= search.max_halvings; ++halving, T *= 0.5) {
    const Vec2 nominal = reference.point(s0 + reference_speed * T);
    StateSpacePoint goal{nominal.x(), nominal.y(), T};
    if (point_free(goal, obstacles)) return goal;
    const int rings = static_cast<int>(std::floor(search.max_radius / search.ring_step + 1e-9));
    for (int ring = 1; ring <= rings; ++ring) {
      const double radius = ring * search.ring_step;
      const int count = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * radius / search.ring_step)));
      double best = -std::numeric_limits<double>::infinity();
      std::optional<StateSpacePoint> found;
      for (int i = 0; i < count; ++i) {
        const double angle = 2.0 * M_PI * i / count;
        const StateSpacePoint p{nominal.x() + radius * std::cos(angle), nominal.y() + radius * std::sin(angle), T};
        const double margin = clearance(p, obstacles);
        if (margin >= 0.0 && margin > best) {
          best = margin;
          found = p;
        }
      }
      if (found) return *found;
    }
  }
  throw GoalUnreachable("no collision-free goal within the search radius");
}

Episode::Episode(const ScenarioConfig& config, std::uint64_t seed, PlannerKind planner, bool keep_snapshots)
    : config_(config),
      planner_(planner),
      keep_snapshots_(keep_snapshots),
      rng_(seed),
      reference_(config.reference()),
      robot_(config.robot_start),
      guidance_(config.guidance) {
  pedestrians_ = spawn_pedestrians(config_, rng_);
  overlapping_.assign(pedestrians_.size(), 0);
}

MpccProblem Episode::make_problem(const ObstacleSet& obstacles) const {
  MpccProblem problem;
  problem.initial = robot_;
  problem.obstacles = obstacles;
  problem.reference = reference_;
  problem.reference_speed = {config_.reference_speed};
  problem.weights = config_.baseline_weights;
  return problem;
}

const StepRecord& Episode::step() {
  const auto started = std::chrono::steady_clock::now();
  const double h = config_.mpcc.step;
  StepRecord record;
  record.step = step_index_;
  record.time = time();
  record.state = robot_;
  record.obstacles = pedestrians_;

  const ObstacleSet obstacles =
      make_obstacle_set(pedestrians_, config_.guidance.steps, config_.guidance.step, config_.robot_radius);
  MpccProblem problem = make_problem(obstacles);
  std::vector<RobotInput> warm;

  if (planner_ == PlannerKind::kGuided) {
    std::optional<GuidanceSpline> spline;
    try {
      const StateSpacePoint goal = plan_goal(robot_, reference_, obstacles, config_.guidance.horizon(),
                                             config_.reference_speed, config_.goal_search);
      GuidanceResult result = guidance_.plan(robot_, obstacles, goal, h, rng_);
      record.high_level_ms = result.elapsed_ms;
      record.candidate_costs = result.selection.costs;
      record.selected_id = result.selection.chosen_id;
      spline = result.selected;
      if (keep_snapshots_) {
        log_.snapshots.push_back({step_index_, std::move(result.graph), std::move(result.candidates),
                                  result.selection.chosen_id});
      }
    } catch (const PlanningError& e) {
      log_info("step {}: guidance failed ({}); reusing the last guidance", step_index_, e.what());
      record.guidance_fallback = true;
      spline = guidance_.last_guidance(config_.mpcc.horizon * h);
      if (spline) record.selected_id = spline->trajectory_id;
    }
    if (spline) {
      problem.reference = ReferencePath::from_spline(*spline, 0.02, robot_.theta);
      problem.reference_speed.clear();
      for (int k = 0; k <= config_.mpcc.horizon; ++k) {
        problem.reference_speed.push_back(spline->sample(std::min(k * h, spline->x.back())).velocity.norm());
      }
      problem.weights = config_.guided_weights;
      warm = warm_start_from_spline(*spline, robot_, config_.mpcc);
      record.spline = std::move(spline);
    }
  }
  if (warm.empty() && previous_solution_) warm = warm_start_from_solution(*previous_solution_, config_.mpcc);

  const MpccSolution solution = solve(problem, config_.mpcc, warm);
  record.mpcc_status = solution.status;
  record.mpcc_iterations = solution.iterations;
  record.mpcc_ms = solution.wall_time_ms;
  if (solution.feasible()) {
    record.input = solution.inputs.front();
    previous_solution_ = solution;
  } else {
    log_info("step {}: local planner infeasible; braking", step_index_);
    record.input = braking_input(config_.mpcc.limits);
    record.braking = true;
    previous_solution_.reset();
  }
  guidance_.age(h);

  robot_ = robot_step(robot_, record.input, h, config_.mpcc.limits);
  for (auto& p : pedestrians_) p.center += p.velocity * h;
  ++step_index_;

  const double inflated = config_.robot_radius + config_.obstacle_radius;
  for (std::size_t i = 0; i < pedestrians_.size(); ++i) {
    const bool overlap = (pedestrians_[i].center - robot_.position()).norm() < inflated;
    if (overlap && !overlapping_[i]) ++collisions_;
    overlapping_[i] = overlap;
  }
  if (robot_.x >= config_.x_end) {
    finished_ = true;
  } else if (time() >= config_.timeout - 1e-9) {
    timed_out_ = true;
  }

  const std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - started;
  record.total_ms = took.count();
  log_.steps.push_back(std::move(record));
  return log_.steps.back();
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / values.size();
  double squares = 0.0;
  for (double v : values) squares += (v - mean) * (v - mean);
  return {mean, std::sqrt(squares / values.size())};
}

EpisodeMetrics Episode::metrics() const {
  EpisodeMetrics m;
  m.steps = step_index_;
  m.task_duration = time();
  m.collision_count = collisions_;
  m.collision_flag = collisions_ > 0;
  m.timeout_flag = timed_out_;
  std::vector<double> compute, high_level;
  for (const auto& r : log_.steps) {
    compute.push_back(r.total_ms);
    if (planner_ == PlannerKind::kGuided) high_level.push_back(r.high_level_ms);
  }
  std::tie(m.mean_compute_ms, m.std_compute_ms) = mean_std(compute);
  std::tie(m.mean_high_level_ms, m.std_high_level_ms) = mean_std(high_level);
  return m;
}

EpisodeResult run_episode(const ScenarioConfig& config, std::uint64_t seed, PlannerKind planner,
                          bool keep_snapshots) {
  Episode episode(config, seed, planner, keep_snapshots);
  while (!episode.done()) episode.step();
  EpisodeResult result;
  result.planner = planner;
  result.seed = seed;
  result.metrics = episode.metrics();
  result.log = std::move(episode.log());
  return result;
}

PlannerSummary summarize(PlannerKind planner, const std::vector<EpisodeMetrics>& episodes) {
  PlannerSummary s;
  s.planner = planner;
  s.episodes = static_cast<int>(episodes.size());
  std::vector<double> duration, compute, high_level;
  for (const auto& m : episodes) {
    duration.push_back(m.task_duration);
    compute.push_back(m.mean_compute_ms);
    high_level.push_back(m.mean_high_level_ms);
    s.collision_episodes += m.collision_flag ? 1 : 0;
    s.timeouts += m.timeout_flag ? 1 : 0;
  }
  std::tie(s.mean_duration, s.std_duration) = mean_std(duration);
  std::tie(s.mean_compute_ms, s.std_compute_ms) = mean_std(compute);
  std::tie(s.mean_high_level_ms, s.std_high_level_ms) = mean_std(high_level);
  return s;
}

BatchResult run_batch(const ScenarioConfig& config, const std::vector<std::uint64_t>& seeds,
                      const std::vector<PlannerKind>& planners, int jobs, bool keep_logs, bool keep_snapshots) {
  BatchResult batch;
  batch.episodes.resize(seeds.size() * planners.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(batch.episodes.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.episodes.size(); i = next++) {
      try {
        const PlannerKind planner = planners[i / seeds.size()];
        EpisodeResult result = run_episode(config, seeds[i % seeds.size()], planner, keep_snapshots);
        if (!keep_logs) result.log = {};
        batch.episodes[i] = std::move(result);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(batch.episodes.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  // First failure in episode order, independent of scheduling.
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  for (std::size_t p = 0; p < planners.size(); ++p) {
    std::vector<EpisodeMetrics> metrics;
    for (std::size_t s = 0; s < seeds.size(); ++s) metrics.push_back(batch.episodes[p * seeds.size() + s].metrics);
    batch.summaries.push_back(summarize(planners[p], metrics));
  }
  return batch;
}

}  // namespace guidance
