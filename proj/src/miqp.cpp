#include "parkplan/miqp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "parkplan/geometry.hpp"

namespace parkplan {

const char* to_string(MiqpStatus status) {
  switch (status) {
    case MiqpStatus::optimal: return "optimal";
    case MiqpStatus::incumbent_only: return "incumbent_only";
    case MiqpStatus::infeasible: return "infeasible";
    case MiqpStatus::failed: return "failed";
  }
  return "unknown";
}

bool CollisionSet::contains(int step, int region) const {
  for (const Entry& e : entries)
    if (e.step == step && e.region == region) return true;
  return false;
}

CollisionSet::Entry* CollisionSet::find(int step, int region) {
  for (Entry& e : entries)
    if (e.step == step && e.region == region) return &e;
  return nullptr;
}

void CollisionSet::add(int step, int region) { entries.push_back(Entry{step, region, 0}); }

namespace {

using Triplet = Eigen::Triplet<double>;

struct Node {
  double bound = -kInf;
  int seq = 0;
  std::vector<std::pair<int, double>> fixes;  // (variable, value in {0, 1})
};

// Min-heap on the bound; creation order breaks ties so runs are repeatable.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

bool is_fixed_in(const Node& node, int var) {
  for (const auto& f : node.fixes)
    if (f.first == var) return true;
  return false;
}

QpResult solve_with_fixes(const QpProblem& tmpl, const std::vector<std::pair<int, double>>& fixes,
                          const QpSettings& settings, int* solves) {
  QpProblem node = tmpl;
  for (const auto& [var, value] : fixes) {
    node.lb(var) = value;
    node.ub(var) = value;
  }
  ++*solves;
  return solve_qp(node, settings);
}

// For every group, the binary whose activation rows keep the most slack at
// the relaxed point; fixing that one to 1 and the rest to 0 is the cheapest
// integral completion to try.
std::vector<std::pair<int, double>> heuristic_fixes(const QpProblem& problem,
                                                    const std::vector<BinaryGroup>& groups,
                                                    const Eigen::VectorXd& x) {
  Eigen::VectorXd resid;
  if (problem.A_in.rows() > 0) resid = problem.b_in - problem.A_in * x;
  std::vector<std::pair<int, double>> fixes;
  for (const BinaryGroup& group : groups) {
    int best = -1;
    double best_slack = -kInf;
    for (std::size_t e = 0; e < group.z_vars.size(); ++e) {
      const int z = group.z_vars[e];
      double slack = kInf;
      if (e < group.rows_per_z.size()) {
        for (int row : group.rows_per_z[e]) {
          // Row value with this binary forced to 1, everything else as relaxed.
          const double coeff = problem.A_in.coeff(row, z);
          slack = std::min(slack, resid(row) + coeff * (x(z) - 1.0));
        }
      }
      if (slack == kInf) slack = x(z);  // no row metadata: prefer the largest relaxed value
      if (slack > best_slack + 1e-12 || (slack > best_slack - 1e-12 && (best < 0 || z < best))) {
        best_slack = std::max(best_slack, slack);
        best = z;
      }
    }
    for (int z : group.z_vars) fixes.emplace_back(z, z == best ? 1.0 : 0.0);
  }
  // A binary shared by several groups keeps the 1: it satisfies every cover.
  std::sort(fixes.begin(), fixes.end());
  std::vector<std::pair<int, double>> merged;
  for (const auto& f : fixes) {
    if (!merged.empty() && merged.back().first == f.first)
      merged.back().second = std::max(merged.back().second, f.second);
    else
      merged.push_back(f);
  }
  return merged;
}

void append_sparse(const Eigen::SparseMatrix<double>& m, std::vector<Triplet>* out) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      out->emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
}

}  // namespace

MiqpResult solve_miqp(const QpProblem& problem, const std::vector<BinaryGroup>& groups,
                      const MiqpSettings& settings) {
  QpProblem tmpl = problem;
  tmpl.finalize();

  std::vector<int> binaries;
  for (const BinaryGroup& g : groups)
    for (int z : g.z_vars) {
      if (z < 0 || z >= tmpl.num_vars) throw std::invalid_argument("miqp: binary index out of range");
      binaries.push_back(z);
    }
  std::sort(binaries.begin(), binaries.end());
  binaries.erase(std::unique(binaries.begin(), binaries.end()), binaries.end());

  MiqpResult out;
  if (binaries.empty()) {
    QpResult r = solve_qp(tmpl, settings.qp);
    out.qp_solves = 1;
    out.nodes = 1;
    if (r.status == QpStatus::optimal) {
      out.status = MiqpStatus::optimal;
      out.x = r.x;
      out.objective = r.objective;
      out.bound = r.objective;
      out.gap = 0.0;
    } else if (r.status == QpStatus::infeasible) {
      out.status = MiqpStatus::infeasible;
    }
    return out;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  int seq = 0;
  open.push(Node{-kInf, seq++, {}});

  bool have_incumbent = false;
  Eigen::VectorXd incumbent_x;
  double incumbent_obj = kInf;
  bool heuristic_pending = settings.root_heuristic;
  bool unproven = false;  // a fully fixed leaf was abandoned without a certificate
  int qp_solves = 0;
  int nodes = 0;
  double final_bound = -kInf;
  bool gap_proven = false;

  const auto gap_scale = [&]() { return std::max(1.0, std::abs(incumbent_obj)); };

  while (!open.empty()) {
    const double queue_bound = open.top().bound;
    if (have_incumbent && incumbent_obj - queue_bound <= settings.rel_gap * gap_scale()) {
      final_bound = queue_bound;
      gap_proven = true;
      break;
    }
    if (nodes >= settings.node_limit) {
      final_bound = queue_bound;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes;

    QpResult rel = solve_with_fixes(tmpl, node.fixes, settings.qp, &qp_solves);
    if (rel.status == QpStatus::infeasible) continue;
    if (rel.status != QpStatus::optimal) {
      // Untrusted relaxation: keep the parent bound and split on the lowest
      // unfixed binary so the subtree is still enumerated.
      int var = -1;
      for (int z : binaries)
        if (!is_fixed_in(node, z)) { var = z; break; }
      if (var < 0) { unproven = true; continue; }
      for (double value : {1.0, 0.0}) {
        Node child = node;
        child.seq = seq++;
        child.fixes.emplace_back(var, value);
        open.push(std::move(child));
      }
      continue;
    }

    int branch_var = -1;
    double branch_frac = settings.int_tol;
    int widest_var = -1;
    double widest_frac = 0.0;
    for (int z : binaries) {
      const double frac = std::abs(rel.x(z) - std::round(rel.x(z)));
      if (frac > branch_frac + 1e-15) { branch_frac = frac; branch_var = z; }
      if (!is_fixed_in(node, z) && frac > widest_frac) { widest_frac = frac; widest_var = z; }
    }

    if (branch_var < 0) {
      // Integral up to tolerance. Re-solve with the binaries pinned exactly so
      // the incumbent satisfies the big-M rows without rounding slack.
      std::vector<std::pair<int, double>> fixes = node.fixes;
      for (int z : binaries)
        if (!is_fixed_in(node, z)) fixes.emplace_back(z, std::round(rel.x(z)));
      QpResult leaf = solve_with_fixes(tmpl, fixes, settings.qp, &qp_solves);
      if (leaf.status == QpStatus::optimal) {
        if (leaf.objective < incumbent_obj) {
          incumbent_obj = leaf.objective;
          incumbent_x = leaf.x;
          have_incumbent = true;
        }
        continue;
      }
      if (widest_var < 0) { unproven = true; continue; }
      branch_var = widest_var;  // rounding failed: split on the least settled binary
    }

    if (have_incumbent && incumbent_obj - rel.objective <= settings.rel_gap * gap_scale()) continue;

    if (heuristic_pending && node.fixes.empty()) {
      heuristic_pending = false;
      const auto fixes = heuristic_fixes(tmpl, groups, rel.x);
      QpResult h = solve_with_fixes(tmpl, fixes, settings.qp, &qp_solves);
      if (h.status == QpStatus::optimal && h.objective < incumbent_obj) {
        incumbent_obj = h.objective;
        incumbent_x = h.x;
        have_incumbent = true;
      }
    }

    for (double value : {1.0, 0.0}) {
      Node child = node;
      child.bound = rel.objective;
      child.seq = seq++;
      child.fixes.emplace_back(branch_var, value);
      open.push(std::move(child));
    }
  }

  out.nodes = nodes;
  out.qp_solves = qp_solves;
  if (open.empty()) {
    gap_proven = have_incumbent && !unproven;
    final_bound = gap_proven ? incumbent_obj : -kInf;
  }
  if (have_incumbent) {
    out.x = incumbent_x;
    out.objective = incumbent_obj;
    out.bound = final_bound;
    out.gap = std::max(0.0, (incumbent_obj - final_bound) / gap_scale());
    out.status = gap_proven ? MiqpStatus::optimal : MiqpStatus::incumbent_only;
  } else if (open.empty() && !unproven) {
    out.status = MiqpStatus::infeasible;
  } else {
    out.status = MiqpStatus::failed;
  }
  return out;
}

namespace {

struct Assembly {
  QpProblem qp;
  std::vector<BinaryGroup> groups;
};

// Clearance at the anchor pose of the worst body point against one edge;
// separation wants this non-negative for every point.
double edge_clearance(const HalfPlane& edge, const Vec2& center, double theta,
                      const std::array<Vec2, 6>& offsets, double margin) {
  double worst = kInf;
  for (const Vec2& offset : offsets) {
    const Vec2 ro = offset.rotated(theta);
    worst = std::min(worst,
                     edge.a * (center.x + ro.x) + edge.b * (center.y + ro.y) + edge.c - margin);
  }
  return worst;
}

// Extends the base problem with one clearance requirement per active
// (step, region) pair. A fresh pair is pushed past the single edge with the
// best clearance at its anchor pose, which needs no binaries. A pair whose
// offences reached the promotion threshold gets the full disjunction: one
// binary per region edge, big-M rows that activate an edge's requirement when
// its binary is 1, and a cover row keeping at least one binary on. Body
// points are affine in (x, y, theta) once the offset rotation is expanded
// around the anchor heading; mirrored steps place the executed image at
// 2 * reflect_center - position with the same heading. Each pair carries one
// slack, priced linearly and quadratically, shared by its rows: a clearance
// the frozen headings cannot reach yet degrades the objective instead of the
// feasibility of the whole problem.
Assembly assemble(const QpProblem& base, const std::vector<StepPoseRef>& steps,
                  const std::vector<ConvexRegion>& regions, const VehicleParams& vehicle,
                  const Vec2& reflect_center, const CollisionSet& active,
                  const std::vector<Pose2D>& anchors, const CollisionResolveSettings& settings) {
  const double big_m = settings.big_m;
  int nz = 0;
  for (const CollisionSet::Entry& e : active.entries) {
    if (e.offences >= settings.promote_offences)
      nz += static_cast<int>(regions[e.region].edges.size());
  }
  const int ng = static_cast<int>(active.entries.size());

  Assembly out;
  QpProblem& qp = out.qp;
  const int nb = base.num_vars;
  qp.num_vars = nb + nz + ng;

  std::vector<Triplet> h_t, eq_t, in_t;
  append_sparse(base.H, &h_t);
  append_sparse(base.A_eq, &eq_t);
  append_sparse(base.A_in, &in_t);

  std::vector<double> rhs;
  rhs.reserve(static_cast<std::size_t>(base.b_in.size()) + 6 * nz + 7 * active.entries.size());
  for (int i = 0; i < base.b_in.size(); ++i) rhs.push_back(base.b_in(i));
  qp.g = Eigen::VectorXd::Zero(qp.num_vars);
  qp.g.head(nb) = base.g;
  qp.g.tail(ng).setConstant(settings.soft_weight);
  qp.lb = Eigen::VectorXd::Constant(qp.num_vars, 0.0);
  qp.ub = Eigen::VectorXd::Constant(qp.num_vars, 1.0);
  qp.lb.head(nb) = base.lb;
  qp.ub.head(nb) = base.ub;
  qp.ub.tail(ng).setConstant(settings.slack_cap);

  const std::array<Vec2, 6> offsets = feature_point_offsets(vehicle);
  int z_cursor = nb;
  int group_index = 0;
  for (const CollisionSet::Entry& entry : active.entries) {
    const StepPoseRef& ref = steps[entry.step];
    const ConvexRegion& region = regions[entry.region];
    const Pose2D& anchor = anchors[entry.step];
    const double theta = anchor.theta;
    const double sgn = ref.mirrored ? -1.0 : 1.0;
    const Vec2 mbase = ref.mirrored ? Vec2{2.0 * reflect_center.x, 2.0 * reflect_center.y}
                                    : Vec2{0.0, 0.0};
    const int slack = nb + nz + group_index++;
    h_t.emplace_back(slack, slack, 2.0 * settings.soft_weight);
    const double margin = settings.separation_margin + entry.offences * settings.repeat_inflation;

    const auto emit_edge_rows = [&](const HalfPlane& edge, int z, std::vector<int>* rows) {
      const double c_used = edge.c - margin;
      for (const Vec2& offset : offsets) {
        const Vec2 ro = offset.rotated(theta);
        const Vec2 q = offset.rotated(theta + M_PI_2);  // derivative of the rotated offset
        const int row = static_cast<int>(rhs.size());
        if (rows) rows->push_back(row);
        in_t.emplace_back(row, ref.x_var, -edge.a * sgn);
        in_t.emplace_back(row, ref.y_var, -edge.b * sgn);
        in_t.emplace_back(row, ref.theta_var, -(edge.a * q.x + edge.b * q.y));
        if (z >= 0) in_t.emplace_back(row, z, big_m);
        in_t.emplace_back(row, slack, -1.0);
        rhs.push_back((z >= 0 ? big_m : 0.0) + c_used +
                      edge.a * (mbase.x + ro.x - q.x * theta) +
                      edge.b * (mbase.y + ro.y - q.y * theta));
      }
    };

    if (entry.offences >= settings.promote_offences) {
      BinaryGroup group;
      for (const HalfPlane& edge : region.edges) {
        const int z = z_cursor++;
        group.z_vars.push_back(z);
        group.rows_per_z.emplace_back();
        emit_edge_rows(edge, z, &group.rows_per_z.back());
      }
      const int cover_row = static_cast<int>(rhs.size());
      for (int z : group.z_vars) in_t.emplace_back(cover_row, z, -1.0);
      rhs.push_back(-1.0);
      out.groups.push_back(std::move(group));
    } else {
      // The anchor evaluates the executed image, so a mirrored pair picks the
      // edge its image can actually clear.
      Vec2 center{anchor.x, anchor.y};
      if (ref.mirrored)
        center = Vec2{2.0 * reflect_center.x - center.x, 2.0 * reflect_center.y - center.y};
      int best = 0;
      double best_clear = -kInf;
      for (std::size_t e = 0; e < region.edges.size(); ++e) {
        const double clear = edge_clearance(region.edges[e], center, theta, offsets, margin);
        if (clear > best_clear) {
          best_clear = clear;
          best = static_cast<int>(e);
        }
      }
      emit_edge_rows(region.edges[best], -1, nullptr);
    }
  }

  qp.H.resize(qp.num_vars, qp.num_vars);
  qp.H.setFromTriplets(h_t.begin(), h_t.end());
  qp.A_eq.resize(base.A_eq.rows(), qp.num_vars);
  qp.A_eq.setFromTriplets(eq_t.begin(), eq_t.end());
  qp.b_eq = base.b_eq;
  qp.A_in.resize(static_cast<int>(rhs.size()), qp.num_vars);
  qp.A_in.setFromTriplets(in_t.begin(), in_t.end());
  qp.b_in.resize(static_cast<int>(rhs.size()));
  for (std::size_t i = 0; i < rhs.size(); ++i) qp.b_in(static_cast<int>(i)) = rhs[i];
  qp.finalize();
  return out;
}

}  // namespace

CollisionResolveResult resolve_collisions(const QpProblem& base_in,
                                          const std::vector<StepPoseRef>& steps,
                                          const std::vector<ConvexRegion>& regions,
                                          const VehicleParams& vehicle, const Vec2& reflect_center,
                                          CollisionSet& active,
                                          const CollisionResolveSettings& settings) {
  QpProblem base = base_in;
  base.finalize();
  for (const StepPoseRef& s : steps) {
    if (s.x_var < 0 || s.x_var >= base.num_vars || s.y_var < 0 || s.y_var >= base.num_vars ||
        s.theta_var < 0 || s.theta_var >= base.num_vars) {
      throw std::invalid_argument("resolve_collisions: pose variable out of range");
    }
  }
  for (const CollisionSet::Entry& e : active.entries) {
    if (e.step < 0 || e.step >= static_cast<int>(steps.size()) || e.region < 0 ||
        e.region >= static_cast<int>(regions.size())) {
      throw std::invalid_argument("resolve_collisions: stale collision entry");
    }
  }

  std::vector<Pose2D> anchors(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
    anchors[i] = Pose2D{steps[i].x_ref, steps[i].y_ref, steps[i].theta_ref};

  CollisionResolveResult out;
  std::vector<std::pair<int, int>> prev_hits;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    out.iterations = iter + 1;
    MiqpResult sol;
    if (active.entries.empty()) {
      sol = solve_miqp(base, {}, settings.miqp);
      out.group_count = 0;
      out.binary_count = 0;
    } else {
      Assembly parts = assemble(base, steps, regions, vehicle, reflect_center, active, anchors,
                                settings);
      sol = solve_miqp(parts.qp, parts.groups, settings.miqp);
      out.group_count = static_cast<int>(active.entries.size());
      out.binary_count = 0;
      for (const BinaryGroup& g : parts.groups)
        out.binary_count += static_cast<int>(g.z_vars.size());
    }
    out.qp_solves += sol.qp_solves;
    out.status = sol.status;
    if (sol.status != MiqpStatus::optimal && sol.status != MiqpStatus::incumbent_only) return out;

    out.x = sol.x.head(base.num_vars);
    out.objective = sol.objective;

    // Exact-trigonometry sweep over the solved trajectory; offenders join the
    // active set, repeat offenders get their separating edges pushed out.
    bool clean = true;
    std::vector<std::pair<int, int>> hit_pairs;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const StepPoseRef& ref = steps[i];
      const double th = out.x(ref.theta_var);
      anchors[i] = Pose2D{out.x(ref.x_var), out.x(ref.y_var), th};
      Vec2 pos{out.x(ref.x_var), out.x(ref.y_var)};
      if (ref.mirrored) pos = Vec2{2.0 * reflect_center.x - pos.x, 2.0 * reflect_center.y - pos.y};
      const ConvexPolygon body = footprint(Pose2D{pos.x, pos.y, th}, vehicle);
      for (std::size_t r = 0; r < regions.size(); ++r) {
        if (!polygons_intersect(body, regions[r].polygon)) continue;
        clean = false;
        hit_pairs.emplace_back(static_cast<int>(i), static_cast<int>(r));
        if (CollisionSet::Entry* hit = active.find(static_cast<int>(i), static_cast<int>(r)))
          hit->offences += 1;
        else
          active.add(static_cast<int>(i), static_cast<int>(r));
      }
    }
    // Offences decay while a pair stays clean, so noise from early anchors
    // neither inflates margins for good nor keeps disjunctions alive.
    for (CollisionSet::Entry& e : active.entries) {
      if (!std::binary_search(hit_pairs.begin(), hit_pairs.end(),
                              std::make_pair(e.step, e.region))) {
        e.offences = std::max(0, e.offences - 1);
      }
    }
    if (std::getenv("PARKPLAN_RESOLVE_DEBUG")) {
      int promoted = 0;
      for (const auto& e : active.entries)
        if (e.offences >= settings.promote_offences) ++promoted;
      std::fprintf(stderr,
                   "[resolve] it=%d entries=%d promoted=%d status=%s nodes=%d hits=%d obj=%.3f\n",
                   iter, static_cast<int>(active.entries.size()), promoted, to_string(sol.status),
                   sol.qp_solves, static_cast<int>(hit_pairs.size()), sol.objective);
    }
    if (clean) {
      out.resolved = true;
      return out;
    }
    // Two identical offender sets in a row mean the linearized rows cannot
    // express the needed correction; more rounds of the same only inflate
    // margins. The caller re-linearizes and tries again.
    if (hit_pairs == prev_hits) return out;
    prev_hits = std::move(hit_pairs);
  }
  return out;
}

}  // namespace parkplan
