#include "guidance/mpcc_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>

#include "guidance/qp_solver.hpp"

namespace guidance {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterations:
      return "max_iterations";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

HalfspaceConstraint linearize_obstacle(const Vec2& robot, const Vec2& obstacle, double robot_radius,
                                       double obstacle_radius, double heading) {
  Vec2 p = robot;
  if ((obstacle - p).norm() < 1e-12) p += 1e-6 * Vec2(std::cos(heading), std::sin(heading));
  HalfspaceConstraint c;
  c.normal = (obstacle - p).normalized();
  c.offset = c.normal.dot(obstacle) - (robot_radius + obstacle_radius);
  return c;
}

std::vector<RobotState> rollout(const RobotState& initial, std::span<const RobotInput> inputs, double h,
                                const RobotLimits& limits) {
  std::vector<RobotState> states;
  states.reserve(inputs.size() + 1);
  states.push_back(initial);
  for (const RobotInput& u : inputs) states.push_back(robot_step(states.back(), u, h, limits));
  return states;
}

std::vector<double> project_progress(const std::vector<RobotState>& states, const ReferencePath& reference) {
  std::vector<double> progress(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    progress[k] = k == 0 ? reference.project(states[k].position())
                         : reference.project(states[k].position(), progress[k - 1] - 0.5, progress[k - 1] + 2.0);
  }
  return progress;
}

namespace {

double reference_speed_at(const MpccProblem& problem, std::size_t k) {
  if (problem.reference_speed.empty()) return 0.0;
  return problem.reference_speed[std::min(k, problem.reference_speed.size() - 1)];
}

}  // namespace

double mpcc_objective(const std::vector<RobotState>& states, std::span<const RobotInput> inputs,
                      const std::vector<double>& progress, const MpccProblem& problem,
                      std::vector<double>* stage_costs) {
  const MpccWeights& w = problem.weights;
  if (stage_costs != nullptr) stage_costs->assign(states.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const ContouringErrors e = contouring_errors(states[k].position(), problem.reference, progress[k]);
    const double dv = states[k].v - reference_speed_at(problem, k);
    double cost = w.contour * e.contour * e.contour + w.lag * e.lag * e.lag + w.velocity * dv * dv;
    if (k < inputs.size()) {
      cost += w.acceleration * inputs[k].a * inputs[k].a + w.yaw_rate * inputs[k].omega * inputs[k].omega;
    }
    if (stage_costs != nullptr) (*stage_costs)[k] = cost;
    total += cost;
  }
  return total;
}

std::vector<RobotInput> warm_start_from_spline(const GuidanceSpline& spline, const RobotState& initial,
                                               const MpccSettings& settings) {
  const double h = settings.step;
  const double t_end = spline.x.back();
  std::vector<RobotInput> inputs;
  inputs.reserve(settings.horizon);
  RobotState state = initial;
  double heading = initial.theta;
  for (int k = 0; k < settings.horizon; ++k) {
    const Vec2 velocity = spline.sample(std::min((k + 1) * h, t_end)).velocity;
    const double speed = velocity.norm();
    if (speed > 1e-6) heading = std::atan2(velocity.y(), velocity.x());
    const RobotInput u = clamp_input({(speed - state.v) / h, normalize_angle(heading - state.theta) / h},
                                     settings.limits);
    inputs.push_back(u);
    state = robot_step(state, u, h, settings.limits);
  }
  return inputs;
}

std::vector<RobotInput> warm_start_from_solution(const MpccSolution& previous, const MpccSettings& settings) {
  std::vector<RobotInput> inputs;
  inputs.reserve(settings.horizon);
  for (int k = 0; k < settings.horizon; ++k) {
    if (previous.inputs.empty()) {
      inputs.push_back({});
    } else {
      const std::size_t i = std::min<std::size_t>(k + 1, previous.inputs.size() - 1);
      inputs.push_back(previous.inputs[i]);
    }
  }
  return inputs;
}

RobotInput braking_input(const RobotLimits& limits) { return {-limits.a_max, 0.0}; }

namespace {

struct Iterate {
  std::vector<RobotInput> inputs;
  std::vector<RobotState> states;
  std::vector<double> progress;
};

// Replaces accelerations cut off by the speed clamp with the realized ones so
// the linear model matches the rollout.
void make_consistent(Iterate& it, const MpccProblem& problem, const MpccSettings& settings) {
  it.states = rollout(problem.initial, it.inputs, settings.step, settings.limits);
  for (std::size_t k = 0; k < it.inputs.size(); ++k) {
    it.inputs[k].a = (it.states[k + 1].v - it.states[k].v) / settings.step;
  }
  it.progress = project_progress(it.states, problem.reference);
}

std::vector<HalfspaceConstraint> linearize_all(const std::vector<RobotState>& states, const MpccProblem& problem,
                                               const MpccSettings& settings) {
  std::vector<HalfspaceConstraint> constraints;
  const auto& obstacles = problem.obstacles;
  for (std::size_t k = 1; k < states.size(); ++k) {
    for (const auto& prediction : obstacles.predictions) {
      const double t = static_cast<double>(k) * settings.step;
      const int index = std::clamp(static_cast<int>(std::lround(t / prediction.step)), 0, prediction.steps());
      HalfspaceConstraint c = linearize_obstacle(states[k].position(), prediction.positions[index],
                                                 obstacles.robot_radius, prediction.radius, states[k].theta);
      c.stage = static_cast<int>(k);
      c.obstacle_id = prediction.obstacle_id;
      constraints.push_back(c);
    }
  }
  return constraints;
}

double max_violation(const std::vector<RobotState>& states, const std::vector<HalfspaceConstraint>& constraints) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) worst = std::max(worst, c.violation(states[c.stage].position()));
  return constraints.empty() ? 0.0 : worst;
}

// Row a^T du <= rhs of the subproblem. Soft rows receive their own slack.
struct CandidateRow {
  int kind;  // 0 obstacle, 1 trust region, 2 speed
  int stage;
  int index;
  Eigen::VectorXd coefficients;
  double rhs;
  bool soft;
};

using RowKey = std::tuple<int, int, int>;

std::vector<CandidateRow> candidate_rows(const Iterate& it, const std::vector<Eigen::MatrixXd>& sensitivity,
                                         const std::vector<HalfspaceConstraint>& constraints,
                                         const MpccSettings& settings) {
  std::vector<CandidateRow> rows;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    const Eigen::MatrixXd& g = sensitivity[c.stage];
    rows.push_back({0, c.stage, static_cast<int>(i), (c.normal.transpose() * g.topRows(2)).transpose(),
                    c.offset - settings.constraint_backoff - c.normal.dot(it.states[c.stage].position()), true});
  }
  for (int k = 2; k <= settings.horizon; ++k) {
    const Eigen::MatrixXd& g = sensitivity[k];
    for (int axis = 0; axis < 2; ++axis) {
      rows.push_back({1, k, 2 * axis, g.row(axis).transpose(), settings.trust_radius, false});
      rows.push_back({1, k, 2 * axis + 1, -g.row(axis).transpose(), settings.trust_radius, false});
    }
  }
  for (int k = 1; k <= settings.horizon; ++k) {
    const Eigen::MatrixXd& g = sensitivity[k];
    rows.push_back({2, k, 0, g.row(3).transpose(), settings.limits.v_max - it.states[k].v, false});
    rows.push_back({2, k, 1, -g.row(3).transpose(), it.states[k].v, false});
  }
  return rows;
}

// Sensitivities G_k = d state_k / d du of the linearized dynamics.
std::vector<Eigen::MatrixXd> sensitivities(const Iterate& it, const MpccSettings& settings) {
  const int N = settings.horizon;
  const double h = settings.step;
  std::vector<Eigen::MatrixXd> g(N + 1, Eigen::MatrixXd::Zero(4, 2 * N));
  for (int k = 0; k < N; ++k) {
    const RobotState& s = it.states[k];
    const double c = std::cos(s.theta), sn = std::sin(s.theta);
    const int cols = 2 * k;
    auto& next = g[k + 1];
    const auto& prev = g[k];
    if (cols > 0) {
      next.row(0).head(cols) = prev.row(0).head(cols) - s.v * sn * h * prev.row(2).head(cols) + c * h * prev.row(3).head(cols);
      next.row(1).head(cols) = prev.row(1).head(cols) + s.v * c * h * prev.row(2).head(cols) + sn * h * prev.row(3).head(cols);
      next.row(2).head(cols) = prev.row(2).head(cols);
      next.row(3).head(cols) = prev.row(3).head(cols);
    }
    next(3, 2 * k) = h;
    next(2, 2 * k + 1) = h;
  }
  return g;
}

struct Subproblem {
  Eigen::VectorXd step;
  bool ok = false;
};

Subproblem solve_subproblem(const Iterate& it, const std::vector<HalfspaceConstraint>& constraints,
                            const MpccProblem& problem, const MpccSettings& settings, std::vector<RowKey>& active_keys) {
  const int N = settings.horizon;
  const int n = 2 * N;
  const MpccWeights& w = problem.weights;
  const auto g = sensitivities(it, settings);

  // Gauss-Newton model of the objective with progress held fixed.
  const int residuals = 3 * (N + 1) + 2 * N;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(residuals, n);
  Eigen::VectorXd res(residuals);
  const double sc = std::sqrt(w.contour), sl = std::sqrt(w.lag), sv = std::sqrt(w.velocity);
  const double sa = std::sqrt(w.acceleration), so = std::sqrt(w.yaw_rate);
  int r = 0;
  for (int k = 0; k <= N; ++k) {
    const Vec2 tangent = problem.reference.tangent(it.progress[k]);
    const Vec2 normal(-tangent.y(), tangent.x());
    const Vec2 offset = it.states[k].position() - problem.reference.point(it.progress[k]);
    jac.row(r) = sc * normal.transpose() * g[k].topRows(2);
    res[r++] = sc * normal.dot(offset);
    jac.row(r) = sl * tangent.transpose() * g[k].topRows(2);
    res[r++] = sl * tangent.dot(offset);
    jac.row(r) = sv * g[k].row(3);
    res[r++] = sv * (it.states[k].v - reference_speed_at(problem, k));
  }
  for (int k = 0; k < N; ++k) {
    jac(r, 2 * k) = sa;
    res[r++] = sa * it.inputs[k].a;
    jac(r, 2 * k + 1) = so;
    res[r++] = so * it.inputs[k].omega;
  }
  Eigen::MatrixXd hessian(n, n);
  hessian.noalias() = 2.0 * jac.transpose() * jac;
  const Eigen::VectorXd gradient = 2.0 * jac.transpose() * res;

  Eigen::VectorXd lower(n), upper(n);
  const auto& lim = settings.limits;
  for (int k = 0; k < N; ++k) {
    lower[2 * k] = -lim.a_max - it.inputs[k].a;
    upper[2 * k] = lim.a_max - it.inputs[k].a;
    lower[2 * k + 1] = -lim.omega_max - it.inputs[k].omega;
    upper[2 * k + 1] = lim.omega_max - it.inputs[k].omega;
  }
  lower = lower.cwiseMin(0.0);
  upper = upper.cwiseMax(0.0);

  const std::vector<CandidateRow> rows = candidate_rows(it, g, constraints, settings);
  std::vector<char> active(rows.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RowKey key{rows[i].kind, rows[i].stage, rows[i].kind == 0 ? constraints[rows[i].index].obstacle_id : rows[i].index};
    if (std::find(active_keys.begin(), active_keys.end(), key) != active_keys.end()) active[i] = 1;
    if (rows[i].kind == 0 && rows[i].rhs < 0.1) active[i] = 1;
  }

  Subproblem out;
  for (int round = 0; round < 20; ++round) {
    std::vector<std::size_t> chosen;
    int slacks = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (active[i]) {
        chosen.push_back(i);
        slacks += rows[i].soft ? 1 : 0;
      }
    }
    const int dim = n + slacks;
    QuadraticProgram qp;
    qp.hessian = Eigen::MatrixXd::Zero(dim, dim);
    qp.hessian.topLeftCorner(n, n) = hessian;
    qp.hessian.diagonal().tail(slacks).setConstant(1e-6);
    qp.gradient = Eigen::VectorXd::Zero(dim);
    qp.gradient.head(n) = gradient;
    qp.gradient.tail(slacks).setConstant(settings.slack_penalty);
    qp.lower = Eigen::VectorXd::Zero(dim);
    qp.upper = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::infinity());
    qp.lower.head(n) = lower;
    qp.upper.head(n) = upper;
    qp.constraints = Eigen::MatrixXd::Zero(chosen.size(), dim);
    qp.bounds.resize(chosen.size());
    int slack = 0;
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      const CandidateRow& row = rows[chosen[j]];
      qp.constraints.row(j).head(n) = row.coefficients.transpose();
      if (row.soft) qp.constraints(j, n + slack++) = -1.0;
      qp.bounds[j] = row.rhs;
    }
    const QpResult result = solve_qp(qp);
    if (result.status == QpStatus::kNumericalFailure) return out;
    out.step = result.z.head(n);
    out.ok = true;

    bool added = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (active[i]) continue;
      if (rows[i].coefficients.dot(out.step) > rows[i].rhs + 1e-9) {
        active[i] = 1;
        added = true;
      }
    }
    if (!added) break;
  }

  active_keys.clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (active[i]) {
      active_keys.emplace_back(rows[i].kind, rows[i].stage,
                               rows[i].kind == 0 ? constraints[rows[i].index].obstacle_id : rows[i].index);
    }
  }
  return out;
}

}  // namespace

MpccSolution solve(const MpccProblem& problem, const MpccSettings& settings, std::span<const RobotInput> warm_start) {
  const auto started = std::chrono::steady_clock::now();
  const int N = settings.horizon;

  Iterate current;
  current.inputs.assign(warm_start.begin(), warm_start.end());
  current.inputs.resize(N, current.inputs.empty() ? RobotInput{} : current.inputs.back());
  for (auto& u : current.inputs) u = clamp_input(u, settings.limits);
  make_consistent(current, problem, settings);

  MpccSolution best;
  bool have_best = false;
  MpccSolution last;
  auto consider = [&](const Iterate& it, const std::vector<HalfspaceConstraint>& constraints) {
    MpccSolution candidate;
    candidate.states = it.states;
    candidate.inputs = it.inputs;
    candidate.progress = it.progress;
    candidate.constraints = constraints;
    candidate.objective = mpcc_objective(it.states, it.inputs, it.progress, problem, &candidate.stage_costs);
    candidate.max_violation = max_violation(it.states, constraints);
    const bool feasible = candidate.max_violation <= settings.feasibility_tolerance;
    if (feasible && (!have_best || candidate.objective < best.objective)) {
      best = candidate;
      have_best = true;
    }
    last = std::move(candidate);
  };

  std::vector<HalfspaceConstraint> constraints = linearize_all(current.states, problem, settings);
  consider(current, constraints);

  std::vector<RowKey> active_keys;
  bool converged = false;
  int iterations = 0;
  for (int iteration = 0; iteration < settings.max_iterations; ++iteration) {
    const Subproblem sub = solve_subproblem(current, constraints, problem, settings, active_keys);
    if (!sub.ok) break;
    ++iterations;
    Iterate next;
    next.inputs.resize(N);
    for (int k = 0; k < N; ++k) {
      next.inputs[k] = clamp_input({current.inputs[k].a + sub.step[2 * k], current.inputs[k].omega + sub.step[2 * k + 1]},
                                   settings.limits);
    }
    make_consistent(next, problem, settings);
    consider(next, constraints);
    current = std::move(next);
    constraints = linearize_all(current.states, problem, settings);
    if (sub.step.lpNorm<Eigen::Infinity>() < settings.step_tolerance) {
      converged = true;
      break;
    }
  }

  MpccSolution result = have_best ? std::move(best) : std::move(last);
  if (!have_best) {
    result.status = SolveStatus::kInfeasible;
  } else {
    result.status = converged ? SolveStatus::kConverged : SolveStatus::kMaxIterations;
  }
  result.iterations = iterations;
  const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
  result.wall_time_ms = elapsed.count();
  return result;
}

}  // namespace guidance
