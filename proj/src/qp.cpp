#include "parkplan/qp.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace parkplan {

void QpProblem::finalize() {
  if (num_vars <= 0) throw std::invalid_argument("qp: num_vars must be positive");
  const int n = num_vars;
  if (H.size() == 0) H.resize(n, n);
  if (g.size() == 0) g = Eigen::VectorXd::Zero(n);
  if (A_eq.size() == 0) A_eq.resize(0, n);
  if (b_eq.size() == 0) b_eq.resize(0);
  if (A_in.size() == 0) A_in.resize(0, n);
  if (b_in.size() == 0) b_in.resize(0);
  if (lb.size() == 0) lb = Eigen::VectorXd::Constant(n, -kInf);
  if (ub.size() == 0) ub = Eigen::VectorXd::Constant(n, kInf);
  if (H.rows() != n || H.cols() != n || g.size() != n || lb.size() != n || ub.size() != n ||
      A_eq.cols() != n || A_in.cols() != n || A_eq.rows() != b_eq.size() ||
      A_in.rows() != b_in.size()) {
    throw std::invalid_argument("qp: inconsistent problem dimensions");
  }
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Constraint system after fixed-variable elimination and bound folding:
// minimize 0.5 x'Hx + g'x  s.t.  E x = be,  C x <= d  over the free variables.
struct Reduced {
  int n = 0;
  SpMat H;
  Eigen::VectorXd g;
  SpMat E;
  Eigen::VectorXd be;
  SpMat C;
  Eigen::VectorXd d;
  std::vector<int> free_index;       // reduced var -> original var
  Eigen::VectorXd fixed_value;       // original var -> value (free entries unused)
  std::vector<bool> fixed;
  std::vector<int> eq_row;           // reduced eq row -> original eq row
  std::vector<int> in_row;           // reduced C row -> original A_in row, -1 for bounds
  Eigen::VectorXd eq_scale;          // applied divisor per reduced eq row
  Eigen::VectorXd in_scale;
  bool contradiction = false;        // constant row found violated during reduction
};

double safe_inf_norm(const Eigen::VectorXd& v) {
  double m = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) m = std::max(m, std::abs(v[i]));
  }
  return m;
}

Reduced reduce(const QpProblem& p, double feas_tol) {
  const int n = p.num_vars;
  Reduced r;
  r.fixed.assign(n, false);
  r.fixed_value = Eigen::VectorXd::Zero(n);
  std::vector<int> remap(n, -1);
  for (int j = 0; j < n; ++j) {
    if (p.lb[j] > p.ub[j] + feas_tol) {
      r.contradiction = true;
      return r;
    }
    if (std::isfinite(p.lb[j]) && p.lb[j] == p.ub[j]) {
      r.fixed[j] = true;
      r.fixed_value[j] = p.lb[j];
    } else {
      remap[j] = r.n++;
      r.free_index.push_back(j);
    }
  }

  // Quadratic cost on the free block; fixed columns fold into the linear term.
  std::vector<Triplet> h_trip;
  r.g = Eigen::VectorXd::Zero(r.n);
  for (int j = 0; j < r.n; ++j) r.g[j] = p.g[r.free_index[j]];
  for (int k = 0; k < p.H.outerSize(); ++k) {
    for (SpMat::InnerIterator it(p.H, k); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (!r.fixed[i] && !r.fixed[j]) {
        h_trip.emplace_back(remap[i], remap[j], it.value());
      } else if (!r.fixed[i] && r.fixed[j]) {
        r.g[remap[i]] += it.value() * r.fixed_value[j];
      }
    }
  }
  r.H.resize(r.n, r.n);
  r.H.setFromTriplets(h_trip.begin(), h_trip.end());

  // Row-wise elimination needs row-major iteration.
  const Eigen::SparseMatrix<double, Eigen::RowMajor> eq_rows(p.A_eq);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> in_rows(p.A_in);

  // Equality rows; rows emptied by elimination must hold as constants.
  std::vector<Triplet> e_trip;
  std::vector<double> e_rhs;
  for (int k = 0; k < eq_rows.rows(); ++k) {
    double rhs = p.b_eq[k];
    std::vector<std::pair<int, double>> cols;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(eq_rows, k); it;
         ++it) {
      const int j = static_cast<int>(it.col());
      if (r.fixed[j]) {
        rhs -= it.value() * r.fixed_value[j];
      } else {
        cols.emplace_back(remap[j], it.value());
      }
    }
    if (cols.empty()) {
      if (std::abs(rhs) > feas_tol) {
        r.contradiction = true;
        return r;
      }
      continue;
    }
    const int row = static_cast<int>(e_rhs.size());
    for (auto& [j, v] : cols) e_trip.emplace_back(row, j, v);
    e_rhs.push_back(rhs);
    r.eq_row.push_back(k);
  }

  // Inequality rows, then finite bounds of the surviving variables.
  std::vector<Triplet> c_trip;
  std::vector<double> c_rhs;
  for (int k = 0; k < in_rows.rows(); ++k) {
    double rhs = p.b_in[k];
    std::vector<std::pair<int, double>> cols;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(in_rows, k); it;
         ++it) {
      const int j = static_cast<int>(it.col());
      if (r.fixed[j]) {
        rhs -= it.value() * r.fixed_value[j];
      } else {
        cols.emplace_back(remap[j], it.value());
      }
    }
    if (cols.empty()) {
      if (rhs < -feas_tol) {
        r.contradiction = true;
        return r;
      }
      continue;
    }
    const int row = static_cast<int>(c_rhs.size());
    for (auto& [j, v] : cols) c_trip.emplace_back(row, j, v);
    c_rhs.push_back(rhs);
    r.in_row.push_back(k);
  }
  for (int j = 0; j < r.n; ++j) {
    const int orig = r.free_index[j];
    if (std::isfinite(p.ub[orig])) {
      c_trip.emplace_back(static_cast<int>(c_rhs.size()), j, 1.0);
      c_rhs.push_back(p.ub[orig]);
      r.in_row.push_back(-1);
    }
    if (std::isfinite(p.lb[orig])) {
      c_trip.emplace_back(static_cast<int>(c_rhs.size()), j, -1.0);
      c_rhs.push_back(-p.lb[orig]);
      r.in_row.push_back(-1);
    }
  }

  auto to_vec = [](const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
  };
  r.E.resize(static_cast<int>(e_rhs.size()), r.n);
  r.E.setFromTriplets(e_trip.begin(), e_trip.end());
  r.be = to_vec(e_rhs);
  r.C.resize(static_cast<int>(c_rhs.size()), r.n);
  r.C.setFromTriplets(c_trip.begin(), c_trip.end());
  r.d = to_vec(c_rhs);

  // Per-row sup-norm scaling keeps the KKT system well conditioned when raw
  // rows carry large constants. The rhs counts too: a row left with a huge
  // constant after elimination would otherwise keep a huge slack.
  auto scale_rows = [](SpMat& m, Eigen::VectorXd& rhs) {
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(m.rows());
    for (int i = 0; i < rhs.size(); ++i) scale[i] = std::max(scale[i], std::abs(rhs[i]));
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SpMat::InnerIterator it(m, k); it; ++it) {
        scale[it.row()] = std::max(scale[it.row()], std::abs(it.value()));
      }
    }
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SpMat::InnerIterator it(m, k); it; ++it) {
        it.valueRef() /= scale[it.row()];
      }
    }
    for (int i = 0; i < rhs.size(); ++i) rhs[i] /= scale[i];
    return scale;
  };
  r.eq_scale = scale_rows(r.E, r.be);
  r.in_scale = scale_rows(r.C, r.d);
  return r;
}

struct InteriorOutcome {
  bool converged = false;
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // equality duals (scaled rows)
  Eigen::VectorXd z;  // inequality duals (scaled rows)
  int iterations = 0;
};

// Predictor-corrector interior point on the reduced system.
InteriorOutcome interior_point(const Reduced& r, const QpSettings& st) {
  const int n = r.n;
  const int me = static_cast<int>(r.E.rows());
  const int mi = static_cast<int>(r.C.rows());
  const double reg = std::max(st.regularization, 1e-12);

  InteriorOutcome out;
  out.x = Eigen::VectorXd::Zero(n);
  out.y = Eigen::VectorXd::Zero(me);
  out.z = Eigen::VectorXd::Ones(mi);
  Eigen::VectorXd s = ((r.d - r.C * out.x).array().max(1.0)).matrix();

  const double scale_ref =
      1.0 + std::max(safe_inf_norm(r.g), std::max(safe_inf_norm(r.be), safe_inf_norm(r.d)));
  const int dim = n + me + mi;
  Eigen::SparseLU<SpMat> lu;
  bool analyzed = false;

  Eigen::VectorXd best_x = out.x, best_y = out.y, best_z = out.z;
  double best_res = kInf;
  int stall = 0;

  for (int iter = 0; iter < st.max_iterations; ++iter) {
    const Eigen::VectorXd r_d = r.H * out.x + r.g + r.E.transpose() * out.y +
                                r.C.transpose() * out.z;
    const Eigen::VectorXd r_p = r.E * out.x - r.be;
    const Eigen::VectorXd r_i = r.C * out.x + s - r.d;
    const double mu = mi > 0 ? s.dot(out.z) / mi : 0.0;
    const double res = std::max({r_d.size() ? r_d.cwiseAbs().maxCoeff() : 0.0,
                                 r_p.size() ? r_p.cwiseAbs().maxCoeff() : 0.0,
                                 r_i.size() ? r_i.cwiseAbs().maxCoeff() : 0.0, mu});
    out.iterations = iter;
    if (res < best_res) {
      if (res < best_res * st.stall_threshold) {
        stall = 0;
      } else {
        ++stall;
      }
      best_res = res;
      best_x = out.x;
      best_y = out.y;
      best_z = out.z;
    } else {
      ++stall;
    }
    if (res <= st.tolerance * scale_ref) {
      out.converged = true;
      return out;
    }
    if (stall > 25) break;

    // KKT matrix with the slack-scaled barrier block.
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(r.H.nonZeros() + 2 * r.E.nonZeros() +
                                     2 * r.C.nonZeros() + dim));
    for (int k = 0; k < r.H.outerSize(); ++k) {
      for (SpMat::InnerIterator it(r.H, k); it; ++it) {
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
    for (int j = 0; j < n; ++j) trip.emplace_back(j, j, reg);
    for (int k = 0; k < r.E.outerSize(); ++k) {
      for (SpMat::InnerIterator it(r.E, k); it; ++it) {
        trip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                          it.value());
        trip.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                          it.value());
      }
    }
    for (int i = 0; i < me; ++i) trip.emplace_back(n + i, n + i, -reg);
    for (int k = 0; k < r.C.outerSize(); ++k) {
      for (SpMat::InnerIterator it(r.C, k); it; ++it) {
        trip.emplace_back(n + me + static_cast<int>(it.row()), static_cast<int>(it.col()),
                          it.value());
        trip.emplace_back(static_cast<int>(it.col()), n + me + static_cast<int>(it.row()),
                          it.value());
      }
    }
    Eigen::VectorXd dk(mi);
    for (int i = 0; i < mi; ++i) {
      dk[i] = std::clamp(s[i] / out.z[i], 1e-10, 1e10);
      trip.emplace_back(n + me + i, n + me + i, -(dk[i] + reg));
    }
    SpMat kkt(dim, dim);
    kkt.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      lu.analyzePattern(kkt);
      analyzed = true;
    }
    lu.factorize(kkt);
    if (lu.info() != Eigen::Success) break;

    auto solve_step = [&](const Eigen::VectorXd& comp_target) {
      // comp_target approximates S z after the step; rhs eliminates ds.
      Eigen::VectorXd rhs(dim);
      rhs.segment(0, n) = -r_d;
      rhs.segment(n, me) = -r_p;
      for (int i = 0; i < mi; ++i) {
        rhs[n + me + i] = -r_i[i] + comp_target[i] / out.z[i];
      }
      Eigen::VectorXd sol = lu.solve(rhs);
      return sol;
    };

    // Predictor: aim at zero complementarity. The slack step is recovered
    // with the same clamped ratio the KKT block used, so the recovered step
    // satisfies the linearized primal row exactly even when the clamp binds.
    auto recover_ds = [&](const Eigen::VectorXd& comp_target, const Eigen::VectorXd& dz_step) {
      Eigen::VectorXd ds_step(mi);
      for (int i = 0; i < mi; ++i) {
        ds_step[i] = -(comp_target[i] / out.z[i] + (dk[i] + reg) * dz_step[i]);
      }
      return ds_step;
    };
    Eigen::VectorXd comp = s.cwiseProduct(out.z);
    Eigen::VectorXd step = solve_step(comp);
    Eigen::VectorXd dz = step.segment(n + me, mi);
    Eigen::VectorXd ds = recover_ds(comp, dz);

    auto boundary = [&](const Eigen::VectorXd& vals, const Eigen::VectorXd& dir) {
      double alpha = 1.0;
      for (int i = 0; i < vals.size(); ++i) {
        if (dir[i] < 0.0) alpha = std::min(alpha, -vals[i] / dir[i]);
      }
      return alpha;
    };
    const double ap_aff = boundary(s, ds);
    const double ad_aff = boundary(out.z, dz);
    double sigma = 0.0;
    if (mi > 0) {
      const double mu_aff =
          (s + ap_aff * ds).dot(out.z + ad_aff * dz) / static_cast<double>(mi);
      sigma = std::clamp(std::pow(mu_aff / std::max(mu, 1e-300), 3.0), 0.0, 0.99);
    }

    // Corrector: recentre and cancel the predicted second-order term.
    for (int i = 0; i < mi; ++i) comp[i] = s[i] * out.z[i] + ds[i] * dz[i] - sigma * mu;
    step = solve_step(comp);
    dz = step.segment(n + me, mi);
    ds = recover_ds(comp, dz);

    const double tau = 0.995;
    const double ap = std::min(1.0, tau * boundary(s, ds));
    const double ad = std::min(1.0, tau * boundary(out.z, dz));
    out.x += ap * step.segment(0, n);
    s += ap * ds;
    out.y += ad * step.segment(n, me);
    out.z += ad * dz;
    for (int i = 0; i < mi; ++i) {
      s[i] = std::max(s[i], 1e-12);
      out.z[i] = std::max(out.z[i], 1e-12);
    }
  }

  out.x = best_x;
  out.y = best_y;
  out.z = best_z;
  return out;
}

// Equality-constrained solve through one saddle-point factorization.
InteriorOutcome equality_solve(const Reduced& r, const QpSettings& st) {
  const int n = r.n;
  const int me = static_cast<int>(r.E.rows());
  const double reg = std::max(st.regularization, 1e-12);
  std::vector<Triplet> trip;
  for (int k = 0; k < r.H.outerSize(); ++k) {
    for (SpMat::InnerIterator it(r.H, k); it; ++it) {
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int j = 0; j < n; ++j) trip.emplace_back(j, j, reg);
  for (int k = 0; k < r.E.outerSize(); ++k) {
    for (SpMat::InnerIterator it(r.E, k); it; ++it) {
      trip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      trip.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()), it.value());
    }
  }
  for (int i = 0; i < me; ++i) trip.emplace_back(n + i, n + i, -reg);
  SpMat kkt(n + me, n + me);
  kkt.setFromTriplets(trip.begin(), trip.end());

  InteriorOutcome out;
  out.x = Eigen::VectorXd::Zero(n);
  out.y = Eigen::VectorXd::Zero(me);
  out.z = Eigen::VectorXd::Zero(0);
  Eigen::SparseLU<SpMat> lu(kkt);
  if (lu.info() != Eigen::Success) return out;
  Eigen::VectorXd rhs(n + me);
  rhs.segment(0, n) = -r.g;
  rhs.segment(n, me) = r.be;
  const Eigen::VectorXd sol = lu.solve(rhs);
  out.x = sol.segment(0, n);
  out.y = sol.segment(n, me);
  out.iterations = 1;
  const double scale_ref = 1.0 + std::max(safe_inf_norm(r.g), safe_inf_norm(r.be));
  const double res = me > 0 ? (r.E * out.x - r.be).cwiseAbs().maxCoeff() : 0.0;
  out.converged = res <= st.tolerance * scale_ref;
  return out;
}

// Minimises the total constraint violation subject to the variable bounds and
// reports the largest single-row violation at that optimum. The maximum is the
// certificate: a converged interior point leaves every slack near the solve
// tolerance regardless of how many rows there are, so a per-row gate stays
// meaningful on problems with thousands of soft rows.
double elastic_violation(const QpProblem& original, const Reduced& r, const QpSettings& st) {
  const int n = r.n;
  const int me = static_cast<int>(r.E.rows());
  // Count only genuine inequality rows; bounds stay hard on x.
  std::vector<int> soft_rows;
  for (size_t k = 0; k < r.in_row.size(); ++k) {
    if (r.in_row[k] >= 0) soft_rows.push_back(static_cast<int>(k));
  }
  const int ms = static_cast<int>(soft_rows.size());

  QpProblem e;
  e.num_vars = n + 2 * me + ms;
  std::vector<Triplet> a_eq, a_in;
  for (int k = 0; k < r.E.outerSize(); ++k) {
    for (SpMat::InnerIterator it(r.E, k); it; ++it) {
      a_eq.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int i = 0; i < me; ++i) {
    a_eq.emplace_back(i, n + i, 1.0);
    a_eq.emplace_back(i, n + me + i, -1.0);
  }
  e.A_eq.resize(me, e.num_vars);
  e.A_eq.setFromTriplets(a_eq.begin(), a_eq.end());
  e.b_eq = r.be;

  std::vector<int> soft_of_row(r.C.rows(), -1);
  for (int i = 0; i < ms; ++i) soft_of_row[soft_rows[i]] = i;
  std::vector<double> b_in;
  for (int k = 0; k < r.C.outerSize(); ++k) {
    for (SpMat::InnerIterator it(r.C, k); it; ++it) {
      a_in.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int i = 0; i < r.C.rows(); ++i) {
    if (soft_of_row[i] >= 0) a_in.emplace_back(i, n + 2 * me + soft_of_row[i], -1.0);
    b_in.push_back(r.d[i]);
  }
  e.A_in.resize(r.C.rows(), e.num_vars);
  e.A_in.setFromTriplets(a_in.begin(), a_in.end());
  e.b_in.resize(static_cast<int>(b_in.size()));
  for (size_t i = 0; i < b_in.size(); ++i) e.b_in[static_cast<int>(i)] = b_in[i];

  e.g = Eigen::VectorXd::Zero(e.num_vars);
  e.g.segment(n, 2 * me + ms).setOnes();
  e.lb = Eigen::VectorXd::Constant(e.num_vars, -kInf);
  e.ub = Eigen::VectorXd::Constant(e.num_vars, kInf);
  e.lb.segment(n, 2 * me + ms).setZero();
  // The x block keeps its own (already reduced) bounds from the original.
  for (int j = 0; j < n; ++j) {
    e.lb[j] = original.lb[r.free_index[j]];
    e.ub[j] = original.ub[r.free_index[j]];
  }
  e.finalize();

  const Reduced re = reduce(e, st.tolerance);
  QpSettings est = st;
  est.max_iterations = std::max(st.max_iterations, 100);
  const InteriorOutcome o = interior_point(re, est);
  if (!o.converged) return -1.0;  // inconclusive
  Eigen::VectorXd full = Eigen::VectorXd::Zero(e.num_vars);
  for (int j = 0; j < re.n; ++j) full[re.free_index[j]] = o.x[j];
  double worst = 0.0;
  for (int i = n; i < e.num_vars; ++i) worst = std::max(worst, full[i]);
  return worst;
}

}  // namespace

QpResult solve_qp(const QpProblem& problem, const QpSettings& settings) {
  QpProblem p = problem;
  p.finalize();
  const double feas_tol = settings.tolerance;

  QpResult result;
  result.eq_duals = Eigen::VectorXd::Zero(p.A_eq.rows());
  result.in_duals = Eigen::VectorXd::Zero(p.A_in.rows());

  const Reduced r = reduce(p, feas_tol);
  if (r.contradiction) {
    result.status = QpStatus::infeasible;
    return result;
  }

  auto assemble = [&](const InteriorOutcome& o) {
    Eigen::VectorXd x = r.fixed_value;
    for (int j = 0; j < r.n; ++j) x[r.free_index[j]] = o.x[j];
    result.x = x;
    result.iterations = o.iterations;
    for (size_t k = 0; k < r.eq_row.size(); ++k) {
      result.eq_duals[r.eq_row[k]] = o.y[static_cast<int>(k)] / r.eq_scale[static_cast<int>(k)];
    }
    for (size_t k = 0; k < r.in_row.size(); ++k) {
      if (r.in_row[k] >= 0 && o.z.size() > static_cast<int>(k)) {
        result.in_duals[r.in_row[k]] =
            o.z[static_cast<int>(k)] / r.in_scale[static_cast<int>(k)];
      }
    }
    result.objective = 0.5 * x.dot(p.H * x) + p.g.dot(x);
  };

  if (r.n == 0) {
    // Everything fixed; reduction already validated the constant rows.
    InteriorOutcome o;
    o.converged = true;
    assemble(o);
    result.status = QpStatus::optimal;
    return result;
  }

  InteriorOutcome o = r.C.rows() == 0 ? equality_solve(r, settings)
                                      : interior_point(r, settings);
  assemble(o);
  if (o.converged) {
    result.status = QpStatus::optimal;
    return result;
  }

  const double violation = elastic_violation(p, r, settings);
  const double infeas_gate =
      10.0 * settings.tolerance * (1.0 + safe_inf_norm(r.be) + safe_inf_norm(r.d));
  if (violation > infeas_gate) {
    result.status = QpStatus::infeasible;
  } else {
    result.status = QpStatus::iteration_limit;
  }
  if (std::getenv("PARKPLAN_QP_DEBUG")) {
    std::fprintf(stderr,
                 "[qp] non-optimal: n=%d me=%d mi=%d iters=%d violation=%.3e gate=%.3e -> %s\n",
                 r.n, static_cast<int>(r.E.rows()), static_cast<int>(r.C.rows()), o.iterations,
                 violation, infeas_gate, to_string(result.status));
  }
  if (const char* prefix = std::getenv("PARKPLAN_QP_DUMP")) {
    static int dump_counter = 0;
    char path[512];
    std::snprintf(path, sizeof(path), "%s_%03d.txt", prefix, dump_counter++);
    if (FILE* f = std::fopen(path, "w")) {
      const auto put_vec = [&](const char* name, const Eigen::VectorXd& v) {
        std::fprintf(f, "%s %d\n", name, static_cast<int>(v.size()));
        for (int i = 0; i < v.size(); ++i) std::fprintf(f, "%.17g\n", v[i]);
      };
      const auto put_mat = [&](const char* name, const Eigen::SparseMatrix<double>& m) {
        std::fprintf(f, "%s %d %d %d\n", name, static_cast<int>(m.rows()),
                     static_cast<int>(m.cols()), static_cast<int>(m.nonZeros()));
        for (int k = 0; k < m.outerSize(); ++k)
          for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            std::fprintf(f, "%d %d %.17g\n", static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
      };
      std::fprintf(f, "qp %d\n", p.num_vars);
      put_mat("H", p.H);
      put_vec("g", p.g);
      put_mat("A_eq", p.A_eq);
      put_vec("b_eq", p.b_eq);
      put_mat("A_in", p.A_in);
      put_vec("b_in", p.b_in);
      put_vec("lb", p.lb);
      put_vec("ub", p.ub);
      std::fclose(f);
    }
  }
  return result;
}

}  // namespace parkplan
