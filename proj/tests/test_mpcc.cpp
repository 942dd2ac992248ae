#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "guidance/mpcc_planner.hpp"
#include "guidance/reference_path.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace guidance;

namespace {

constexpr double kR = 0.325;
constexpr double kRobs = 0.3;

ObstacleSet obstacles(const std::vector<Obstacle>& list) { return make_obstacle_set(list, 120, 0.05, kR); }

Obstacle static_obstacle(const Vec2& c, int id = 0) {
  Obstacle o;
  o.id = id;
  o.center = c;
  o.radius = kRobs;
  return o;
}

MpccProblem straight_problem(const RobotState& initial, const std::vector<Obstacle>& list, MpccWeights w = {}) {
  MpccProblem p;
  p.initial = initial;
  p.reference = ReferencePath::straight({0, 0}, {100, 0});
  p.reference_speed = {2.0};
  p.obstacles = obstacles(list);
  p.weights = w;
  return p;
}

// Spline through (0,0) -> (3, side * 1.5) -> (6, 0) -> (12, 0) over 6 s.
GuidanceSpline passing_spline(double side, const ObstacleSet& obs, const RobotState& robot) {
  GeometricTrajectory g{PiecewiseTrajectory({{0, 0, 0}, {3, side * 1.5, 1.5}, {6, 0, 3}, {12, 0, 6}}, 2.0), {1}, 1};
  SmoothingConfig config;
  config.weights.obstacle = 0.0;
  return smooth_trajectory(g, obs, config, robot);
}

PiecewiseTrajectory as_trajectory(const std::vector<RobotState>& states, double h) {
  std::vector<StateSpacePoint> w;
  for (std::size_t k = 0; k < states.size(); ++k) w.push_back({states[k].x, states[k].y, k * h});
  return PiecewiseTrajectory(std::move(w), 2.0);
}

void expect_sound(const HalfspaceConstraint& c, const Vec2& center, double inflated) {
  EXPECT_NEAR(c.normal.norm(), 1.0, 1e-12);
  for (int i = 0; i < 360; ++i) {
    const double a = 2 * M_PI * i / 360;
    for (double scale : {1.0, 0.5, 0.0}) {
      const Vec2 q = center + scale * inflated * Vec2(std::cos(a), std::sin(a));
      EXPECT_GE(c.violation(q), -1e-12);
    }
  }
}

}  // namespace

TEST(ContouringErrors, OnPath) {
  const auto ref = ReferencePath::straight({0, 0}, {10, 0});
  const auto e = contouring_errors({4, 0}, ref, 4.0);
  EXPECT_DOUBLE_EQ(e.lag, 0.0);
  EXPECT_DOUBLE_EQ(e.contour, 0.0);
}

TEST(ContouringErrors, StraightAxis) {
  const auto ref = ReferencePath::straight({0, 0}, {10, 0});
  const auto e = contouring_errors({2.3, 0.2}, ref, 2.0);
  EXPECT_NEAR(e.lag, 0.3, 1e-15);
  EXPECT_NEAR(e.contour, 0.2, 1e-15);
}

TEST(ContouringErrors, RotationInvariant) {
  Random rng(1);
  for (int i = 0; i < 50; ++i) {
    const double angle = rng.uniform(-M_PI, M_PI);
    const Eigen::Matrix2d R = Eigen::Rotation2Dd(angle).toRotationMatrix();
    const std::vector<Vec2> pts{{0, 0}, {3, 1}, {5, -1}, {9, 0}};
    std::vector<Vec2> rotated;
    for (const auto& p : pts) rotated.push_back(R * p);
    const ReferencePath a(pts), b(rotated);
    const Vec2 p(rng.uniform(0, 9), rng.uniform(-2, 2));
    const double s = rng.uniform(0, a.length());
    const auto ea = contouring_errors(p, a, s);
    const auto eb = contouring_errors(R * p, b, s);
    EXPECT_NEAR(ea.lag, eb.lag, 1e-12);
    EXPECT_NEAR(ea.contour, eb.contour, 1e-12);
  }
}

TEST(ReferencePath, ProjectAndExtrapolate) {
  const ReferencePath ref({{0, 0}, {2, 0}, {2, 2}});
  EXPECT_DOUBLE_EQ(ref.length(), 4.0);
  EXPECT_NEAR(ref.project({1, 0.5}), 1.0, 1e-12);
  EXPECT_NEAR(ref.project({2.5, 1.0}), 3.0, 1e-12);
  EXPECT_EQ(ref.point(5.0), Vec2(2, 3));
  EXPECT_EQ(ref.point(-1.0), Vec2(-1, 0));
  EXPECT_THROW(ReferencePath({{1, 1}, {1, 1}}), std::invalid_argument);
}

TEST(LinearizeObstacle, Examples) {
  const auto a = linearize_obstacle({0, 0}, {2, 0}, 0.5, 0.5);
  EXPECT_EQ(a.normal, Vec2(1, 0));
  EXPECT_DOUBLE_EQ(a.offset, 1.0);
  const auto b = linearize_obstacle({0, 0}, {0, 3}, 0.5, 0.5);
  EXPECT_NEAR(b.normal.x(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(b.normal.y(), 1.0);
  EXPECT_DOUBLE_EQ(b.offset, 2.0);
}

TEST(LinearizeObstacle, TangentAndSound) {
  Random rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec2 o(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double r = rng.uniform(0.1, 0.6), ro = rng.uniform(0.1, 0.6);
    const auto c = linearize_obstacle(p, o, r, ro);
    EXPECT_NEAR(c.violation(o), r + ro, 1e-12);
    expect_sound(c, o, r + ro);
  }
}

TEST(LinearizeObstacle, CoincidentCenters) {
  const auto c = linearize_obstacle({1, 1}, {1, 1}, 0.5, 0.5, M_PI / 2);
  EXPECT_NEAR(c.normal.y(), -1.0, 1e-9);
  expect_sound(c, {1, 1}, 1.0);
}

TEST(Mpcc, NoObstacleEquilibrium) {
  const auto problem = straight_problem({0, 0, 0, 2}, {});
  const MpccSettings settings;
  const std::vector<RobotInput> warm(settings.horizon);
  const auto sol = solve(problem, settings, warm);
  ASSERT_TRUE(sol.feasible());
  for (const auto& u : sol.inputs) {
    EXPECT_LT(std::abs(u.a), 1e-3);
    EXPECT_LT(std::abs(u.omega), 1e-3);
  }
  for (const auto& s : sol.states) EXPECT_NEAR(s.v, 2.0, 1e-3);
}

TEST(Mpcc, StaticObstacleOnPathKeepsClearance) {
  const MpccSettings settings;
  const RobotState robot{0, 0, 0, 2};
  const std::vector<RobotInput> straight(settings.horizon);
  const std::vector<RobotInput> braking(settings.horizon, braking_input(settings.limits));
  int feasible = 0;
  for (double x : {2.0, 2.5, 3.0, 3.5, 4.0, 5.0}) {
    const auto problem = straight_problem(robot, {static_obstacle({x, 0})});
    const auto around = warm_start_from_spline(passing_spline(1.0, problem.obstacles, robot), robot, settings);
    for (const auto* warm : {&braking, &around, &straight}) {
      const auto sol = solve(problem, settings, *warm);
      if (warm == &braking) {
        ASSERT_TRUE(sol.feasible()) << "x " << x;
      }
      if (!sol.feasible()) {
        EXPECT_EQ(sol.status, SolveStatus::kInfeasible);
        continue;
      }
      ++feasible;
      for (const auto& s : sol.states) EXPECT_GE((s.position() - Vec2(x, 0)).norm(), kR + kRobs - 1e-6) << "x " << x;
    }
  }
  EXPECT_GE(feasible, 12);
}

TEST(Mpcc, DynamicsReproducedExactly) {
  const auto problem = straight_problem({0, 0.3, 0.2, 1.5}, {static_obstacle({3, 0.2}), static_obstacle({2, -1.5}, 1)});
  const MpccSettings settings;
  const std::vector<RobotInput> warm(settings.horizon);
  const auto sol = solve(problem, settings, warm);
  ASSERT_EQ(sol.states.size(), 41u);
  ASSERT_EQ(sol.inputs.size(), 40u);
  RobotState s = problem.initial;
  EXPECT_EQ(sol.states[0].x, s.x);
  for (int k = 0; k < 40; ++k) {
    s = robot_step(s, sol.inputs[k], settings.step, settings.limits);
    EXPECT_EQ(sol.states[k + 1].x, s.x);
    EXPECT_EQ(sol.states[k + 1].y, s.y);
    EXPECT_EQ(sol.states[k + 1].theta, s.theta);
    EXPECT_EQ(sol.states[k + 1].v, s.v);
  }
}

TEST(Mpcc, RandomScenesSatisfyConstraints) {
  Random rng(3);
  int feasible = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Obstacle> list;
    const int count = 1 + static_cast<int>(rng.uniform() * 6);
    for (int i = 0; i < count; ++i) {
      Obstacle o = static_obstacle({rng.uniform(1.5, 6), rng.uniform(-2, 2)}, i);
      o.velocity = {rng.uniform(-1.5, 0.5), rng.uniform(-0.5, 0.5)};
      if (o.center.norm() < 1.2) continue;
      list.push_back(o);
    }
    const auto problem = straight_problem({0, 0, 0, 2}, list);
    const MpccSettings settings;
    const std::vector<RobotInput> warm(settings.horizon);
    const auto sol = solve(problem, settings, warm);
    for (const auto& c : sol.constraints) {
      const auto& pred = problem.obstacles.predictions[c.obstacle_id];
      const int k = std::clamp(static_cast<int>(std::lround(c.stage * settings.step / pred.step)), 0, pred.steps());
      expect_sound(c, pred.positions[k], kR + kRobs);
    }
    if (!sol.feasible()) continue;
    ++feasible;
    EXPECT_LE(sol.max_violation, 1e-6);
    for (const auto& c : sol.constraints) EXPECT_LE(c.violation(sol.states[c.stage].position()), 1e-6);
  }
  EXPECT_GT(feasible, 30);
}

TEST(Mpcc, WarmStartSelectsPassingSide) {
  const RobotState robot{0, 0, 0, 2};
  const Obstacle o = static_obstacle({3, 0});
  const ObstacleSet obs = obstacles({o});
  MpccSettings settings;
  std::map<double, int> signatures;
  for (double side : {1.0, -1.0}) {
    const auto spline = passing_spline(side, obs, robot);
    MpccProblem problem;
    problem.initial = robot;
    problem.reference = ReferencePath::from_spline(spline, 0.02, robot.theta);
    problem.reference_speed.clear();
    for (int k = 0; k <= settings.horizon; ++k) {
      problem.reference_speed.push_back(spline.sample(k * settings.step).velocity.norm());
    }
    problem.obstacles = obs;
    problem.weights = MpccWeights::guided();
    // Horizon long enough to pass the obstacle.
    settings.horizon = 60;
    problem.reference_speed.resize(61, problem.reference_speed.back());
    const auto warm = warm_start_from_spline(spline, robot, settings);
    const auto sol = solve(problem, settings, warm);
    ASSERT_TRUE(sol.feasible());
    const int expected = oracle::passing_signature(as_trajectory(rollout(robot, warm, settings.step, settings.limits), settings.step), o.center, o.velocity);
    const int got = oracle::passing_signature(as_trajectory(sol.states, settings.step), o.center, o.velocity);
    EXPECT_EQ(got, expected) << "side " << side;
    signatures[side] = got;
  }
  EXPECT_NE(signatures[1.0], signatures[-1.0]);
}

TEST(Mpcc, DeterministicAndDescending) {
  Random rng(4);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Obstacle> list;
    for (int i = 0; i < 3; ++i) {
      Obstacle o = static_obstacle({rng.uniform(2, 6), rng.uniform(-2, 2)}, i);
      o.velocity = {rng.uniform(-1, 0), 0};
      list.push_back(o);
    }
    const auto problem = straight_problem({0, rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), 2}, list);
    const MpccSettings settings;
    std::vector<RobotInput> warm(settings.horizon);
    for (auto& u : warm) u = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const auto a = solve(problem, settings, warm);
    const auto b = solve(problem, settings, warm);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      EXPECT_EQ(a.states[k].x, b.states[k].x);
      EXPECT_EQ(a.states[k].y, b.states[k].y);
    }
    EXPECT_EQ(a.objective, b.objective);

    const auto states = rollout(problem.initial, warm, settings.step, settings.limits);
    bool warm_feasible = true;
    for (int k = 0; k <= settings.horizon && warm_feasible; ++k) {
      for (const auto& pred : problem.obstacles.predictions) {
        const Vec2 c = pred.positions[std::min(k, pred.steps())];
        const auto h = linearize_obstacle(states[k].position(), c, kR, kRobs, states[k].theta);
        if (h.violation(states[k].position()) > 1e-6) warm_feasible = false;
      }
    }
    if (!warm_feasible || !a.feasible()) continue;
    ++checked;
    const double warm_objective = mpcc_objective(states, warm, project_progress(states, problem.reference), problem);
    EXPECT_LE(a.objective, warm_objective + 1e-9);
    EXPECT_NEAR(a.objective, mpcc_objective(a.states, a.inputs, a.progress, problem), 1e-9);
  }
  EXPECT_GT(checked, 5);
}

TEST(Mpcc, WarmStartFromSolutionShifts) {
  MpccSolution prev;
  for (int k = 0; k < 40; ++k) prev.inputs.push_back({0.01 * k, -0.01 * k});
  const auto w = warm_start_from_solution(prev, {});
  ASSERT_EQ(w.size(), 40u);
  EXPECT_EQ(w[0].a, prev.inputs[1].a);
  EXPECT_EQ(w[38].omega, prev.inputs[39].omega);
  EXPECT_EQ(w[39].omega, prev.inputs[39].omega);
}

TEST(Mpcc, WarmStartFromSplineRespectsLimits) {
  const RobotState robot{0, 0, 0, 0.5};
  const auto spline = passing_spline(1.0, obstacles({}), robot);
  const MpccSettings settings;
  const auto w = warm_start_from_spline(spline, robot, settings);
  ASSERT_EQ(w.size(), 40u);
  for (const auto& u : w) {
    EXPECT_LE(std::abs(u.a), settings.limits.a_max);
    EXPECT_LE(std::abs(u.omega), settings.limits.omega_max);
  }
}

TEST(Mpcc, BrakingInput) {
  const auto u = braking_input({});
  EXPECT_EQ(u.a, -2.0);
  EXPECT_EQ(u.omega, 0.0);
}
