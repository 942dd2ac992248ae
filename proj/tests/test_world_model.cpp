#include <gtest/gtest.h>

#include <cmath>

#include "guidance/random.hpp"
#include "guidance/world_model.hpp"

using namespace guidance;

namespace {

ObstacleSet static_obstacle(const Vec2& center, double robot_radius, double obstacle_radius) {
  Obstacle o;
  o.center = center;
  o.radius = obstacle_radius;
  return make_obstacle_set({o}, 120, 0.05, robot_radius);
}

}  // namespace

TEST(RobotStep, StraightLine) {
  const RobotState s = robot_step({0, 0, 0, 1}, {0, 0}, 0.05);
  EXPECT_DOUBLE_EQ(s.x, 0.05);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
  EXPECT_DOUBLE_EQ(s.theta, 0.0);
  EXPECT_DOUBLE_EQ(s.v, 1.0);
}

TEST(RobotStep, AxisAligned) {
  const RobotState s = robot_step({0, 0, M_PI / 2, 2}, {0, 0}, 0.05);
  EXPECT_NEAR(s.x, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.y, 0.1);
  EXPECT_DOUBLE_EQ(s.theta, M_PI / 2);
  EXPECT_DOUBLE_EQ(s.v, 2.0);
}

TEST(RobotStep, VelocityUpdatesAfterPosition) {
  const RobotState s = robot_step({0, 0, 0, 0}, {1, 0}, 0.05);
  EXPECT_DOUBLE_EQ(s.v, 0.05);
  EXPECT_DOUBLE_EQ(s.x, 0.0);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
}

TEST(RobotStep, ClampsInputsAndSpeed) {
  const RobotLimits limits;
  const RobotState s = robot_step({0, 0, 0, 2.45}, {10, 10}, 0.05, limits);
  EXPECT_DOUBLE_EQ(s.v, limits.v_max);
  EXPECT_DOUBLE_EQ(s.theta, limits.omega_max * 0.05);
  const RobotState b = robot_step({0, 0, 0, 0.01}, {-2, 0}, 0.05, limits);
  EXPECT_DOUBLE_EQ(b.v, 0.0);
}

TEST(RobotStep, ZeroInputPreservesSpeedAndHeading) {
  Random rng(3);
  for (int i = 0; i < 100; ++i) {
    const RobotState s{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3), rng.uniform(0, 2.5)};
    const RobotState n = robot_step(s, {0, 0}, 0.05);
    EXPECT_EQ(n.v, s.v);
    EXPECT_EQ(n.theta, s.theta);
  }
}

TEST(RobotStep, HeadingStaysNormalized) {
  RobotState s{0, 0, 3.1, 1};
  for (int i = 0; i < 200; ++i) {
    s = robot_step(s, {0, 2}, 0.05);
    EXPECT_GT(s.theta, -M_PI);
    EXPECT_LE(s.theta, M_PI);
  }
}

TEST(NormalizeAngle, Range) {
  EXPECT_DOUBLE_EQ(normalize_angle(-M_PI), M_PI);
  EXPECT_DOUBLE_EQ(normalize_angle(M_PI), M_PI);
  EXPECT_NEAR(normalize_angle(3 * M_PI / 2), -M_PI / 2, 1e-15);
}

TEST(PointFree, FarAway) {
  const auto obs = static_obstacle({10, 10}, 0.325, 0.3);
  EXPECT_TRUE(point_free({0, 0, 0}, obs));
}

TEST(PointFree, CoincidentCenters) {
  const auto obs = static_obstacle({2, 0}, 0.5, 0.5);
  EXPECT_FALSE(point_free({2, 0, 1}, obs));
}

TEST(PointFree, JustOutside) {
  const auto obs = static_obstacle({2, 0}, 0.5, 0.5);
  EXPECT_TRUE(point_free({2, 1.01, 1}, obs));
}

TEST(PointFree, MonotoneInRadius) {
  Random rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec2 c(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const StateSpacePoint p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 6)};
    const double r = rng.uniform(0.1, 1.0);
    if (!point_free(p, static_obstacle(c, r, 0.3))) continue;
    EXPECT_TRUE(point_free(p, static_obstacle(c, 0.5 * r, 0.3)));
  }
}

TEST(PointFree, InterpolatesMovingObstacle) {
  Obstacle o;
  o.center = {0, 0};
  o.velocity = {1, 0};
  const auto obs = make_obstacle_set({o}, 10, 0.5, 0.2);
  // Halfway between samples the center is at x = 0.25.
  EXPECT_FALSE(point_free({0.25, 0.0, 0.25}, obs));
  EXPECT_TRUE(point_free({0.25, 0.6, 0.25}, obs));
}

TEST(SegmentFree, DegenerateSegment) {
  const auto obs = static_obstacle({2, 0}, 0.5, 0.5);
  EXPECT_TRUE(segment_free({0, 2, 0}, {0, 2, 0}, obs));
}

TEST(SegmentFree, ThroughObstacle) {
  const auto obs = static_obstacle({2, 0}, 0.5, 0.5);
  EXPECT_FALSE(segment_free({0, 0, 0}, {4, 0, 2}, obs));
}

TEST(SegmentFree, BesideObstacle) {
  const auto obs = static_obstacle({2, 0}, 0.5, 0.5);
  EXPECT_TRUE(segment_free({0, 2, 0}, {4, 2, 2}, obs));
}

TEST(SegmentFree, SymmetricAndImpliesEndpointsFree) {
  Random rng(11);
  std::vector<Obstacle> obstacles;
  for (int i = 0; i < 4; ++i) {
    Obstacle o;
    o.id = i;
    o.center = {rng.uniform(0, 8), rng.uniform(-3, 3)};
    o.velocity = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    obstacles.push_back(o);
  }
  const auto obs = make_obstacle_set(obstacles, 120, 0.05, 0.325);
  for (int i = 0; i < 500; ++i) {
    const StateSpacePoint a{rng.uniform(0, 8), rng.uniform(-3, 3), rng.uniform(0, 6)};
    const StateSpacePoint b{rng.uniform(0, 8), rng.uniform(-3, 3), rng.uniform(0, 6)};
    const bool ab = segment_free(a, b, obs);
    EXPECT_EQ(ab, segment_free(b, a, obs));
    if (ab) {
      EXPECT_TRUE(point_free(a, obs));
      EXPECT_TRUE(point_free(b, obs));
    }
  }
}

TEST(Prediction, ConstantVelocity) {
  Obstacle o;
  o.center = {0, 0};
  o.velocity = {1, 0};
  const auto p = predict_constant_velocity(o, 10, 0.05);
  ASSERT_EQ(p.positions.size(), 11u);
  EXPECT_NEAR(p.positions[10].x(), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(p.positions[10].y(), 0.0);
}

TEST(Prediction, StaticObstacle) {
  Obstacle o;
  o.center = {3, -1};
  const auto p = predict_constant_velocity(o, 20, 0.05);
  for (const auto& q : p.positions) EXPECT_EQ(q, o.center);
}

TEST(Prediction, HandRecurrence) {
  Obstacle o;
  o.center = {1, 1};
  o.velocity = {-1, 2};
  const auto p = predict_constant_velocity(o, 2, 0.5);
  ASSERT_EQ(p.positions.size(), 3u);
  EXPECT_EQ(p.positions[0], Vec2(1, 1));
  EXPECT_EQ(p.positions[1], Vec2(0.5, 2));
  EXPECT_EQ(p.positions[2], Vec2(0, 3));
}

TEST(Prediction, DisplacementMatchesSpeed) {
  Obstacle o;
  o.velocity = {0.6, -0.8};
  const auto p = predict_constant_velocity(o, 40, 0.05);
  for (std::size_t k = 1; k < p.positions.size(); ++k) {
    EXPECT_NEAR((p.positions[k] - p.positions[k - 1]).norm(), 0.05, 1e-12);
  }
}

TEST(Prediction, InterpolationReproducesSamples) {
  Obstacle o;
  o.center = {0.3, 0.7};
  o.velocity = {1.3, -0.4};
  const auto p = predict_constant_velocity(o, 40, 0.05);
  for (int k = 0; k <= 40; ++k) EXPECT_LT((p.position_at(k * p.step) - p.positions[k]).norm(), 1e-12);
}
