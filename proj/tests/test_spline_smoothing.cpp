#include <gtest/gtest.h>

#include "guidance/errors.hpp"
#include "guidance/spline_smoothing.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace guidance;

namespace {

GeometricTrajectory geometric(std::vector<StateSpacePoint> w) {
  return {PiecewiseTrajectory(std::move(w), 2.0), {1}, 1};
}

PointMatrix points(std::initializer_list<std::pair<double, double>> xy) {
  PointMatrix m(static_cast<Eigen::Index>(xy.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [x, y] : xy) m.row(i++) << x, y;
  return m;
}

SmoothingConfig weights(double geo, double smooth, double obst, double vel) {
  SmoothingConfig c;
  c.weights = {geo, smooth, obst, vel};
  return c;
}

PointMatrix swap_axes(const PointMatrix& m) {
  PointMatrix s(m.rows(), 2);
  s.col(0) = m.col(1);
  s.col(1) = m.col(0);
  return s;
}

Vec2 swapped(const Vec2& v) { return {v.y(), v.x()}; }

ObstacleSet swap_obstacles(const ObstacleSet& in) {
  ObstacleSet out = in;
  for (auto& p : out.predictions) {
    for (auto& c : p.positions) c = swapped(c);
  }
  return out;
}

}  // namespace

TEST(SampleControlPoints, StraightLine) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {4, 0, 2}}), 5);
  EXPECT_DOUBLE_EQ(set.dt, 0.5);
  const PointMatrix expected = points({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  EXPECT_LT((set.reference - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(set.points, set.reference);
}

TEST(SampleControlPoints, EndpointsOnly) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {2, 1, 1}, {4, 0, 2}}), 2);
  EXPECT_EQ(set.reference, points({{0, 0}, {4, 0}}));
}

TEST(SampleControlPoints, InterpolatesAcrossKink) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {2, 2, 1}, {4, 0, 2}}), 5);
  const PointMatrix expected = points({{0, 0}, {1, 1}, {2, 2}, {3, 1}, {4, 0}});
  EXPECT_LT((set.reference - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(VelocityReference, HandRecurrence) {
  const PointMatrix q = points({{0, 0}, {1, 0}, {2, 0}});
  const PointMatrix v = velocity_reference_points(q, 1.0, 2.0, Vec2::Zero(), 0.0);
  EXPECT_EQ(v, points({{0, 0}, {2, 0}, {4, 0}}));
}

TEST(VelocityReference, FixedPointAtReferenceSpeed) {
  const PointMatrix q = points({{0, 0}, {0.5, 0}, {1.0, 0}, {1.5, 0}});
  EXPECT_EQ(velocity_reference_points(q, 0.25, 2.0, Vec2::Zero(), 0.0), q);
}

TEST(VelocityReference, RightAngleStretchesEachStep) {
  const PointMatrix q = points({{0, 0}, {1, 0}, {1, 1}, {1, 2}});
  const PointMatrix v = velocity_reference_points(q, 1.0, 3.0, Vec2::Zero(), 0.0);
  EXPECT_LT((v - points({{0, 0}, {3, 0}, {3, 3}, {3, 6}})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(VelocityReference, CoincidentPointsReuseDirection) {
  const PointMatrix q = points({{0, 0}, {0, 1}, {0, 1}, {0, 2}});
  const PointMatrix v = velocity_reference_points(q, 1.0, 1.0, Vec2::Zero(), 0.0);
  EXPECT_LT((v - points({{0, 0}, {0, 1}, {0, 2}, {0, 3}})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(VelocityReference, NoDirectionUsesHeading) {
  const PointMatrix q = points({{1, 1}, {1, 1}, {1, 1}});
  const PointMatrix v = velocity_reference_points(q, 1.0, 1.0, Vec2::Zero(), M_PI / 2);
  EXPECT_LT((v - points({{1, 1}, {1, 2}, {1, 3}})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(VelocityReference, RobotVelocityOverridesFirstDirection) {
  const PointMatrix q = points({{0, 0}, {1, 0}, {2, 0}});
  const PointMatrix v = velocity_reference_points(q, 1.0, 1.0, Vec2(0, 2), 0.0);
  EXPECT_LT((v - points({{0, 0}, {0, 1}, {1, 1}})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ObstacleQuadratic, VerbatimCoefficients) {
  const auto q = obstacle_quadratic({3, 1}, {1, 0}, 0.625, ObstacleCostSign::kVerbatim);
  // A = (2, 1), H = A A^T / 2, f = -(1 + R) A - 2 H o.
  EXPECT_DOUBLE_EQ(q.hessian(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(q.hessian(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(q.hessian(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(q.linear.x(), -1.625 * 2 - 2 * 2.0);
  EXPECT_DOUBLE_EQ(q.linear.y(), -1.625 * 1 - 2 * 1.0);
  const auto f = obstacle_quadratic({3, 1}, {1, 0}, 0.625, ObstacleCostSign::kFlipped);
  EXPECT_DOUBLE_EQ(f.linear.x(), 1.625 * 2 - 2 * 2.0);
  EXPECT_EQ(f.hessian, q.hessian);
}

TEST(Optimize, GeometricOnlyReturnsReference) {
  Random rng(1);
  const auto inst = instances::smoothing_instance(rng);
  const auto set = sample_control_points(inst.trajectory, 20);
  const auto out = optimize_control_points(set, inst.obstacles, weights(1, 0, 0, 0), inst.initial_velocity,
                                           inst.heading);
  EXPECT_LT((out.points - set.reference).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Optimize, FiniteDifferenceGradientVanishes) {
  Random rng(2);
  for (int seed = 0; seed < 20; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = sample_control_points(inst.trajectory, inst.num_points);
    SmoothingConfig config;
    const auto out = optimize_control_points(set, inst.obstacles, config, inst.initial_velocity, inst.heading);
    const PointMatrix qv =
        velocity_reference_points(set.reference, set.dt, config.reference_speed, inst.initial_velocity, inst.heading);
    const auto oracle = oracle::make_smoothing_oracle(set, qv, inst.obstacles, config);
    const auto g = oracle::central_gradient(oracle, oracle::flatten(out.points), 1e-6L);
    for (auto v : g) EXPECT_LT(std::fabs(v), 1e-6L);
  }
}

TEST(Optimize, MatchesIterativeMinimizer) {
  Random rng(3);
  for (int seed = 0; seed < 50; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = sample_control_points(inst.trajectory, inst.num_points);
    for (auto sign : {ObstacleCostSign::kVerbatim, ObstacleCostSign::kFlipped}) {
      SmoothingConfig config;
      config.obstacle_sign = sign;
      const auto out = optimize_control_points(set, inst.obstacles, config, inst.initial_velocity, inst.heading);
      const PointMatrix qv = velocity_reference_points(set.reference, set.dt, config.reference_speed,
                                                       inst.initial_velocity, inst.heading);
      const auto oracle = oracle::make_smoothing_oracle(set, qv, inst.obstacles, config);
      const auto x = oracle::minimize_quadratic(oracle, oracle::flatten(set.reference));
      const auto y = oracle::flatten(out.points);
      for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(static_cast<double>(x[i]), static_cast<double>(y[i]), 1e-7);
    }
  }
}

TEST(Optimize, CostAgreesWithOracle) {
  Random rng(4);
  for (int seed = 0; seed < 20; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = sample_control_points(inst.trajectory, inst.num_points);
    const SmoothingConfig config;
    const PointMatrix qv =
        velocity_reference_points(set.reference, set.dt, config.reference_speed, inst.initial_velocity, inst.heading);
    const auto oracle = oracle::make_smoothing_oracle(set, qv, inst.obstacles, config);
    PointMatrix probe = set.reference;
    for (Eigen::Index i = 0; i < probe.rows(); ++i) probe.row(i) += Eigen::RowVector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double a = smoothing_cost(probe, set, qv, inst.obstacles, config);
    const double b = static_cast<double>(oracle(oracle::flatten(probe)));
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(b)));
  }
}

TEST(Optimize, CollinearPointsStayCollinear) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {2, 1, 1}, {6, 3, 2}}), 3);
  const ObstacleSet none = make_obstacle_set({}, 120, 0.05, 0.325);
  SmoothingConfig config = weights(1, 1, 0, 0);
  const auto out = optimize_control_points(set, none, config, Vec2::Zero(), 0.0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Vec2 p = out.points.row(i).transpose();
    EXPECT_NEAR(p.x() - 2.0 * p.y(), 0.0, 1e-12);
  }
  // Against the numerical minimizer.
  const PointMatrix qv = velocity_reference_points(set.reference, set.dt, 2.0, Vec2::Zero(), 0.0);
  const auto oracle = oracle::make_smoothing_oracle(set, qv, none, config);
  const auto x = oracle::minimize_quadratic(oracle, oracle::flatten(set.reference));
  const auto y = oracle::flatten(out.points);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(static_cast<double>(x[i]), y[i], 1e-9);
}

TEST(Optimize, ObstacleWeightZeroIgnoresObstacles) {
  Random rng(5);
  const auto inst = instances::smoothing_instance(rng);
  const auto set = sample_control_points(inst.trajectory, 20);
  const ObstacleSet none = make_obstacle_set({}, 120, 0.05, 0.325);
  const SmoothingConfig config = weights(25, 10, 0, 0.01);
  const auto a = optimize_control_points(set, inst.obstacles, config, inst.initial_velocity, inst.heading);
  const auto b = optimize_control_points(set, none, config, inst.initial_velocity, inst.heading);
  EXPECT_EQ(a.points, b.points);
}

TEST(Optimize, NeverIncreasesCost) {
  Random rng(6);
  for (int seed = 0; seed < 50; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = sample_control_points(inst.trajectory, inst.num_points);
    const SmoothingConfig config;
    const auto out = optimize_control_points(set, inst.obstacles, config, inst.initial_velocity, inst.heading);
    const PointMatrix qv =
        velocity_reference_points(set.reference, set.dt, config.reference_speed, inst.initial_velocity, inst.heading);
    EXPECT_LE(smoothing_cost(out.points, set, qv, inst.obstacles, config),
              smoothing_cost(set.reference, set, qv, inst.obstacles, config) + 1e-9);
  }
}

TEST(Optimize, ScalingWeightsLeavesMinimizer) {
  Random rng(7);
  for (int seed = 0; seed < 10; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = sample_control_points(inst.trajectory, inst.num_points);
    const SmoothingConfig a;
    SmoothingConfig b;
    b.weights = {25 * 3.7, 10 * 3.7, 0.5 * 3.7, 0.01 * 3.7};
    const auto qa = optimize_control_points(set, inst.obstacles, a, inst.initial_velocity, inst.heading);
    const auto qb = optimize_control_points(set, inst.obstacles, b, inst.initial_velocity, inst.heading);
    EXPECT_LT((qa.points - qb.points).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Optimize, AxisSymmetry) {
  Random rng(8);
  for (int seed = 0; seed < 10; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = sample_control_points(inst.trajectory, inst.num_points);
    ControlPointSet mirrored = set;
    mirrored.reference = swap_axes(set.reference);
    mirrored.points = swap_axes(set.points);
    const SmoothingConfig config;
    const auto a = optimize_control_points(set, inst.obstacles, config, inst.initial_velocity, inst.heading);
    const auto b = optimize_control_points(mirrored, swap_obstacles(inst.obstacles), config,
                                           swapped(inst.initial_velocity), M_PI / 2 - inst.heading);
    EXPECT_LT((swap_axes(a.points) - b.points).cwiseAbs().maxCoeff(), 1e-10);
    const auto sa = fit_cubic_spline(a, inst.initial_velocity, 1);
    const auto sb = fit_cubic_spline(b, swapped(inst.initial_velocity), 1);
    for (double t = 0; t <= sa.duration(); t += 0.1) {
      EXPECT_LT((swapped(sa.sample(t).position) - sb.sample(t).position).norm(), 1e-10);
    }
  }
}

TEST(Optimize, SingularWithoutWeights) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {4, 0, 2}}), 5);
  const ObstacleSet none = make_obstacle_set({}, 120, 0.05, 0.325);
  EXPECT_THROW(optimize_control_points(set, none, weights(0, 0, 0, 0), Vec2::Zero(), 0.0), SingularSystem);
  EXPECT_THROW(optimize_control_points(set, none, weights(-1, 0, 0, 0), Vec2::Zero(), 0.0), SingularSystem);
}

// The verbatim obstacle term has gradient w_obst * A (|A|^2 - 1 - R) at the
// reference point: far points are pulled toward the obstacle, near points
// pushed away. The flipped sign gives w_obst * A (|A|^2 + 1 + R), which pulls
// at every distance.
TEST(Optimize, VerbatimObstacleTermDirection) {
  Obstacle o;
  o.center = {2, 0};
  const ObstacleSet obs = make_obstacle_set({o}, 120, 0.05, 0.325);
  const double R = 0.625;
  for (double offset : {0.9, 2.5}) {
    ControlPointSet set;
    set.dt = 0.5;
    set.reference = points({{2, offset}});
    set.points = set.reference;
    for (auto sign : {ObstacleCostSign::kVerbatim, ObstacleCostSign::kFlipped}) {
      SmoothingConfig config = weights(25, 0, 0.5, 0);
      config.obstacle_sign = sign;
      const auto out = optimize_control_points(set, obs, config, Vec2::Zero(), 0.0);
      const double moved = out.points(0, 1) - offset;
      const bool far = offset * offset > 1 + R;
      const bool attracts = sign == ObstacleCostSign::kFlipped || far;
      if (attracts) {
        EXPECT_LT(moved, 0.0) << "offset " << offset;
      } else {
        EXPECT_GT(moved, 0.0) << "offset " << offset;
      }
    }
  }
}

TEST(FitSpline, InterpolatesAndMatchesInitialVelocity) {
  Random rng(9);
  for (int seed = 0; seed < 20; ++seed) {
    const auto inst = instances::smoothing_instance(rng);
    const auto set = optimize_control_points(sample_control_points(inst.trajectory, inst.num_points), inst.obstacles,
                                             {}, inst.initial_velocity, inst.heading);
    const auto spline = fit_cubic_spline(set, inst.initial_velocity, 3, {1, 2});
    EXPECT_EQ(spline.trajectory_id, 3);
    EXPECT_EQ(spline.segment_ids, (std::vector<int>{1, 2}));
    for (Eigen::Index i = 0; i < set.size(); ++i) {
      EXPECT_LT((spline.sample(i * set.dt).position - set.points.row(i).transpose()).norm(), 1e-9);
    }
    EXPECT_LT((spline.sample(0).velocity - inst.initial_velocity).norm(), 1e-9);
    EXPECT_LT(spline.sample(spline.duration()).acceleration.norm(), 1e-9);
    const auto& knots = spline.x.knots();
    for (std::size_t k = 1; k + 1 < knots.size(); ++k) {
      for (const auto* axis : {&spline.x, &spline.y}) {
        const auto& left = axis->pieces()[k - 1];
        const auto& right = axis->pieces()[k];
        const double h = knots[k] - knots[k - 1];
        const double value = ((left[0] * h + left[1]) * h + left[2]) * h + left[3];
        const double first = (3 * left[0] * h + 2 * left[1]) * h + left[2];
        const double second = 6 * left[0] * h + 2 * left[1];
        const double scale = std::max(1.0, std::abs(right[1] * 2));
        EXPECT_NEAR(value, right[3], 1e-9);
        EXPECT_NEAR(first, right[2], 1e-9);
        EXPECT_LT(std::abs(second - 2 * right[1]) / scale, 1e-6);
      }
    }
  }
}

TEST(FitSpline, LinearDataHasZeroAcceleration) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {6, 3, 3}}), 10);
  const auto spline = fit_cubic_spline(set, Vec2(2, 1), 1);
  for (double t = 0; t <= 3.0; t += 0.05) {
    EXPECT_LT(spline.sample(t).acceleration.norm(), 1e-12);
    EXPECT_LT((spline.sample(t).velocity - Vec2(2, 1)).norm(), 1e-12);
  }
}

TEST(FitSpline, VelocityMatchesFiniteDifference) {
  Random rng(10);
  const auto inst = instances::smoothing_instance(rng);
  const auto set = optimize_control_points(sample_control_points(inst.trajectory, 20), inst.obstacles, {},
                                           inst.initial_velocity, inst.heading);
  const auto spline = fit_cubic_spline(set, inst.initial_velocity, 1);
  const double h = 1e-5;
  for (Eigen::Index i = 1; i + 1 < set.size(); ++i) {
    const double t = i * set.dt;
    const Vec2 fd = (spline.sample(t + h).position - spline.sample(t - h).position) / (2 * h);
    EXPECT_LT((fd - spline.sample(t).velocity).norm(), 1e-5);
  }
}

TEST(FitSpline, SampleClampsOutsideRange) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {4, 0, 2}}), 5);
  const auto spline = fit_cubic_spline(set, Vec2(2, 0), 1);
  EXPECT_EQ(spline.sample(-1.0).position, spline.sample(0.0).position);
  EXPECT_EQ(spline.sample(5.0).position, spline.sample(2.0).position);
}

TEST(ShiftSpline, MovesTimeOrigin) {
  const auto set = sample_control_points(geometric({{0, 0, 0}, {2, 2, 1}, {4, 0, 2}}), 9);
  const auto spline = fit_cubic_spline(set, Vec2(1, 1), 1);
  const auto shifted = shift_spline(spline, 0.3);
  EXPECT_DOUBLE_EQ(shifted.x.front(), -0.3);
  for (double t = 0; t <= 1.7; t += 0.1) {
    EXPECT_LT((shifted.sample(t).position - spline.sample(t + 0.3).position).norm(), 1e-12);
  }
}

TEST(SmoothTrajectory, Pipeline) {
  Random rng(11);
  const auto inst = instances::smoothing_instance(rng);
  const RobotState robot{0, 0, inst.heading, inst.initial_velocity.norm()};
  SmoothingConfig config;
  config.num_points = 20;
  const auto spline = smooth_trajectory(inst.trajectory, inst.obstacles, config, robot);
  EXPECT_EQ(spline.trajectory_id, inst.trajectory.trajectory_id);
  EXPECT_EQ(spline.x.knots().size(), 20u);
  EXPECT_NEAR(spline.duration(), 6.0, 1e-12);
  EXPECT_LT((spline.sample(0).velocity - robot.velocity()).norm(), 1e-9);
}
