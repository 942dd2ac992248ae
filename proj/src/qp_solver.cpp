#include "guidance/qp_solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace guidance {
namespace {

// Largest step in (0, 1] keeping v + alpha * dv >= 0.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& index) {
  Eigen::VectorXd out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) out[i] = v[index[i]];
  return out;
}

}  // namespace

QpResult solve_qp(const QuadraticProgram& qp, const QpSettings& settings) {
  const Eigen::Index n = qp.gradient.size();
  const Eigen::Index m = qp.constraints.rows();
  const Eigen::MatrixXd& A = qp.constraints;
  const Eigen::MatrixXd& H = qp.hessian;

  std::vector<Eigen::Index> lower_index, upper_index;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(qp.lower[i])) lower_index.push_back(i);
    if (std::isfinite(qp.upper[i])) upper_index.push_back(i);
  }
  const Eigen::Index nl = static_cast<Eigen::Index>(lower_index.size());
  const Eigen::Index nu = static_cast<Eigen::Index>(upper_index.size());
  const Eigen::VectorXd lo = gather(qp.lower, lower_index);
  const Eigen::VectorXd hi = gather(qp.upper, upper_index);

  QpResult result;
  result.z = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lb = qp.lower[i], ub = qp.upper[i];
    if (std::isfinite(lb) && std::isfinite(ub)) {
      result.z[i] = std::clamp(0.0, lb + 0.01 * (ub - lb), ub - 0.01 * (ub - lb));
    } else if (std::isfinite(lb)) {
      result.z[i] = std::max(0.0, lb + 1.0);
    } else if (std::isfinite(ub)) {
      result.z[i] = std::min(0.0, ub - 1.0);
    }
  }
  Eigen::VectorXd& z = result.z;

  const Eigen::Index count = m + nl + nu;
  if (count == 0) {
    Eigen::LDLT<Eigen::MatrixXd> factor(H + settings.regularization * Eigen::MatrixXd::Identity(n, n));
    z = factor.solve(-qp.gradient);
    result.status = factor.info() == Eigen::Success && z.allFinite() ? QpStatus::kSolved : QpStatus::kNumericalFailure;
    result.multipliers.resize(0);
    return result;
  }

  Eigen::VectorXd w = (qp.bounds - A * z).cwiseMax(1.0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd wl = (gather(z, lower_index) - lo).cwiseMax(1.0);
  Eigen::VectorXd lambda_l = Eigen::VectorXd::Ones(nl);
  Eigen::VectorXd wu = (hi - gather(z, upper_index)).cwiseMax(1.0);
  Eigen::VectorXd lambda_u = Eigen::VectorXd::Ones(nu);

  const double scale_d = 1.0 + qp.gradient.lpNorm<Eigen::Infinity>();
  const double scale_p = 1.0 + std::max({m > 0 ? qp.bounds.lpNorm<Eigen::Infinity>() : 0.0,
                                         nl > 0 ? lo.lpNorm<Eigen::Infinity>() : 0.0,
                                         nu > 0 ? hi.lpNorm<Eigen::Infinity>() : 0.0});

  Eigen::MatrixXd normal(n, n);
  Eigen::LLT<Eigen::MatrixXd> factor(n);

  for (int iteration = 0; iteration < settings.max_iterations; ++iteration) {
    result.iterations = iteration + 1;
    Eigen::VectorXd r_d = H * z + qp.gradient + A.transpose() * lambda;
    for (Eigen::Index i = 0; i < nl; ++i) r_d[lower_index[i]] -= lambda_l[i];
    for (Eigen::Index i = 0; i < nu; ++i) r_d[upper_index[i]] += lambda_u[i];
    const Eigen::VectorXd r_a = A * z + w - qp.bounds;
    const Eigen::VectorXd r_l = gather(z, lower_index) - wl - lo;
    const Eigen::VectorXd r_u = gather(z, upper_index) + wu - hi;

    const double mu = (w.dot(lambda) + wl.dot(lambda_l) + wu.dot(lambda_u)) / count;
    double primal = 0.0;
    if (m > 0) primal = std::max(primal, r_a.lpNorm<Eigen::Infinity>());
    if (nl > 0) primal = std::max(primal, r_l.lpNorm<Eigen::Infinity>());
    if (nu > 0) primal = std::max(primal, r_u.lpNorm<Eigen::Infinity>());
    if (r_d.lpNorm<Eigen::Infinity>() <= settings.tolerance * scale_d && primal <= settings.tolerance * scale_p &&
        mu <= settings.tolerance) {
      result.status = QpStatus::kSolved;
      result.multipliers = lambda;
      return result;
    }

    const Eigen::VectorXd d = lambda.cwiseQuotient(w);
    const Eigen::VectorXd dl = lambda_l.cwiseQuotient(wl);
    const Eigen::VectorXd du = lambda_u.cwiseQuotient(wu);
    normal.noalias() = A.transpose() * d.asDiagonal() * A;
    normal += H;
    normal.diagonal().array() += settings.regularization;
    for (Eigen::Index i = 0; i < nl; ++i) normal(lower_index[i], lower_index[i]) += dl[i];
    for (Eigen::Index i = 0; i < nu; ++i) normal(upper_index[i], upper_index[i]) += du[i];
    factor.compute(normal);
    if (factor.info() != Eigen::Success) break;

    struct Step {
      Eigen::VectorXd z, w, lambda, wl, lambda_l, wu, lambda_u;
    };
    auto solve_step = [&](const Eigen::VectorXd& rc, const Eigen::VectorXd& rcl, const Eigen::VectorXd& rcu) {
      Eigen::VectorXd rhs = -r_d - A.transpose() * (rc + lambda.cwiseProduct(r_a)).cwiseQuotient(w);
      const Eigen::VectorXd tl = (rcl - lambda_l.cwiseProduct(r_l)).cwiseQuotient(wl);
      const Eigen::VectorXd tu = (rcu + lambda_u.cwiseProduct(r_u)).cwiseQuotient(wu);
      for (Eigen::Index i = 0; i < nl; ++i) rhs[lower_index[i]] += tl[i];
      for (Eigen::Index i = 0; i < nu; ++i) rhs[upper_index[i]] -= tu[i];
      Step s;
      s.z = factor.solve(rhs);
      s.w = -r_a - A * s.z;
      s.lambda = (rc - lambda.cwiseProduct(s.w)).cwiseQuotient(w);
      s.wl = r_l + gather(s.z, lower_index);
      s.lambda_l = (rcl - lambda_l.cwiseProduct(s.wl)).cwiseQuotient(wl);
      s.wu = -r_u - gather(s.z, upper_index);
      s.lambda_u = (rcu - lambda_u.cwiseProduct(s.wu)).cwiseQuotient(wu);
      return s;
    };
    auto step_length = [&](const Step& s) {
      return std::min({max_step(w, s.w), max_step(lambda, s.lambda), max_step(wl, s.wl),
                       max_step(lambda_l, s.lambda_l), max_step(wu, s.wu), max_step(lambda_u, s.lambda_u)});
    };

    const Step affine = solve_step(-w.cwiseProduct(lambda), -wl.cwiseProduct(lambda_l), -wu.cwiseProduct(lambda_u));
    const double alpha_affine = step_length(affine);
    const double mu_affine = ((w + alpha_affine * affine.w).dot(lambda + alpha_affine * affine.lambda) +
                              (wl + alpha_affine * affine.wl).dot(lambda_l + alpha_affine * affine.lambda_l) +
                              (wu + alpha_affine * affine.wu).dot(lambda_u + alpha_affine * affine.lambda_u)) /
                             count;
    const double sigma = std::pow(std::clamp(mu_affine / mu, 0.0, 1.0), 3);

    const Eigen::VectorXd rc = (-w.cwiseProduct(lambda) - affine.w.cwiseProduct(affine.lambda)).array() + sigma * mu;
    const Eigen::VectorXd rcl =
        (-wl.cwiseProduct(lambda_l) - affine.wl.cwiseProduct(affine.lambda_l)).array() + sigma * mu;
    const Eigen::VectorXd rcu =
        (-wu.cwiseProduct(lambda_u) - affine.wu.cwiseProduct(affine.lambda_u)).array() + sigma * mu;
    const Step step = solve_step(rc, rcl, rcu);
    const double alpha = std::min(1.0, 0.995 * step_length(step));

    z += alpha * step.z;
    w += alpha * step.w;
    lambda += alpha * step.lambda;
    wl += alpha * step.wl;
    lambda_l += alpha * step.lambda_l;
    wu += alpha * step.wu;
    lambda_u += alpha * step.lambda_u;
    if (!z.allFinite()) break;
    result.status = QpStatus::kMaxIterations;
  }
  if (!z.allFinite()) result.status = QpStatus::kNumericalFailure;
  result.multipliers = lambda;
  return result;
}

}  // namespace guidance
