#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>

namespace parkplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Convex quadratic program
//   minimize    0.5 x' H x + g' x
//   subject to  A_eq x  = b_eq
//               A_in x <= b_in
//               lb <= x <= ub
// H must be symmetric positive semidefinite. Empty lb/ub mean unbounded.
struct QpProblem {
  int num_vars = 0;
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
  Eigen::SparseMatrix<double> A_eq;
  Eigen::VectorXd b_eq;
  Eigen::SparseMatrix<double> A_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  // Sizes matrices that were left empty and checks dimension consistency.
  void finalize();
};

enum class QpStatus { optimal, infeasible, iteration_limit };

const char* to_string(QpStatus status);

struct QpResult {
  QpStatus status = QpStatus::iteration_limit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  // Multipliers for the explicit constraint rows (not the variable bounds):
  // eq_duals free-signed, in_duals nonnegative.
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd in_duals;
};

struct QpSettings {
  double tolerance = 1e-6;
  int max_iterations = 200;
  double regularization = 1e-9;
  // Residual progress below this factor per iteration counts as a stall and
  // triggers the feasibility check.
  double stall_threshold = 0.99;
};

// Primal-dual interior-point solve with a predictor-corrector step. The
// returned status is `infeasible` only when an elastic relaxation certifies
// that no point satisfies the constraints within tolerance. Deterministic:
// identical inputs produce identical outputs.
QpResult solve_qp(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace parkplan
