#pragma once

// Reference solvers for checking the interior-point results independently.
// Exponential enumeration; intended for small dense problems in tests only.

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace parkplan::testing {

struct DenseQp {
  Eigen::MatrixXd H;   // strictly convex for a unique reference optimum
  Eigen::VectorXd g;
  Eigen::MatrixXd Ae;  // Ae x = be
  Eigen::VectorXd be;
  Eigen::MatrixXd Ai;  // Ai x <= bi
  Eigen::VectorXd bi;
};

struct DenseSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Tries every subset of inequality rows as the active set, solves the
// corresponding equality-constrained KKT system, and keeps the best point
// that is primal feasible with nonnegative active multipliers. For a convex
// problem any such point is globally optimal.
inline std::optional<DenseSolution> enumerate_optimum(const DenseQp& qp,
                                                      double tol = 1e-8) {
  const int n = static_cast<int>(qp.H.rows());
  const int me = static_cast<int>(qp.Ae.rows());
  const int mi = static_cast<int>(qp.Ai.rows());
  std::optional<DenseSolution> best;

  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < mi; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    const int ma = static_cast<int>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + me + ma, n + me + ma);
    Eigen::VectorXd rhs(n + me + ma);
    kkt.topLeftCorner(n, n) = qp.H;
    rhs.segment(0, n) = -qp.g;
    if (me > 0) {
      kkt.block(n, 0, me, n) = qp.Ae;
      kkt.block(0, n, n, me) = qp.Ae.transpose();
      rhs.segment(n, me) = qp.be;
    }
    for (int k = 0; k < ma; ++k) {
      kkt.block(n + me + k, 0, 1, n) = qp.Ai.row(active[k]);
      kkt.block(0, n + me + k, n, 1) = qp.Ai.row(active[k]).transpose();
      rhs[n + me + k] = qp.bi[active[k]];
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.segment(0, n);

    bool ok = true;
    for (int i = 0; i < mi && ok; ++i) {
      if (qp.Ai.row(i).dot(x) > qp.bi[i] + tol) ok = false;
    }
    for (int k = 0; k < ma && ok; ++k) {
      if (sol[n + me + k] < -tol) ok = false;
    }
    if (me > 0 && ok) {
      ok = (qp.Ae * x - qp.be).cwiseAbs().maxCoeff() <= tol;
    }
    if (!ok) continue;

    const double obj = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
    if (!best || obj < best->objective - 1e-12) best = DenseSolution{x, obj};
  }
  return best;
}

// First-order optimality check for a claimed primal-dual solution.
// Returns the largest violation across stationarity, feasibility, dual sign,
// and complementary slackness.
inline double kkt_violation(const DenseQp& qp, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  double worst = 0.0;
  Eigen::VectorXd stat = qp.H * x + qp.g;
  if (qp.Ae.rows() > 0) stat += qp.Ae.transpose() * y;
  if (qp.Ai.rows() > 0) stat += qp.Ai.transpose() * z;
  if (stat.size() > 0) worst = std::max(worst, stat.cwiseAbs().maxCoeff());
  if (qp.Ae.rows() > 0) {
    worst = std::max(worst, (qp.Ae * x - qp.be).cwiseAbs().maxCoeff());
  }
  for (int i = 0; i < qp.Ai.rows(); ++i) {
    const double slack = qp.bi[i] - qp.Ai.row(i).dot(x);
    worst = std::max(worst, -slack);          // primal feasibility
    worst = std::max(worst, -z[i]);           // dual sign
    worst = std::max(worst, std::abs(z[i] * slack));  // complementarity
  }
  return worst;
}

}  // namespace parkplan::testing
