#pragma once

#include <Eigen/Core>

namespace guidance {

/// Dense convex QP
///   minimize   1/2 z^T H z + g^T z
///   subject to A z <= b,  lower <= z <= upper
/// Bounds may be infinite. H must be positive semidefinite.
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd constraints;  // A, m x n (m may be zero)
  Eigen::VectorXd bounds;       // b
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct QpSettings {
  int max_iterations = 80;
  double tolerance = 1e-10;
  double regularization = 1e-12;
};

enum class QpStatus { kSolved, kMaxIterations, kNumericalFailure };

struct QpResult {
  Eigen::VectorXd z;
  Eigen::VectorXd multipliers;  // for the rows of A
  QpStatus status = QpStatus::kNumericalFailure;
  int iterations = 0;
};

/// Mehrotra predictor-corrector primal-dual interior point method with an
/// infeasible start. Bounds enter the normal equations as diagonal terms.
QpResult solve_qp(const QuadraticProgram& problem, const QpSettings& settings = {});

}  // namespace guidance
