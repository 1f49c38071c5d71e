#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "parkplan/miqp.hpp"

using namespace parkplan;

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr double kBigM = 1000.0;

// Disjunctive test instance: continuous block with a strictly convex cost,
// binaries wired through big-M rows, one cover row per group.
struct Instance {
  QpProblem qp;
  std::vector<BinaryGroup> groups;
  std::vector<int> binaries;
};

struct RowDraft {
  std::vector<Triplet> coeffs;
  std::vector<double> rhs;
  int rows() const { return static_cast<int>(rhs.size()); }
};

Instance random_disjunctive(std::mt19937& rng, int n_cont, const std::vector<int>& group_sizes) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> easy(0.2, 2.0);
  std::uniform_real_distribution<double> tight(-1.5, 1.5);

  int nb = 0;
  for (int s : group_sizes) nb += s;
  Instance inst;
  QpProblem& p = inst.qp;
  p.num_vars = n_cont + nb;

  Eigen::MatrixXd m(n_cont, n_cont);
  for (int i = 0; i < n_cont; ++i)
    for (int j = 0; j < n_cont; ++j) m(i, j) = coef(rng);
  const Eigen::MatrixXd h = m.transpose() * m + Eigen::MatrixXd::Identity(n_cont, n_cont);
  std::vector<Triplet> ht;
  for (int i = 0; i < n_cont; ++i)
    for (int j = 0; j < n_cont; ++j)
      if (h(i, j) != 0.0) ht.emplace_back(i, j, h(i, j));
  p.H.resize(p.num_vars, p.num_vars);
  p.H.setFromTriplets(ht.begin(), ht.end());
  p.g = Eigen::VectorXd::Zero(p.num_vars);
  for (int i = 0; i < n_cont; ++i) p.g(i) = coef(rng);

  p.lb = Eigen::VectorXd::Constant(p.num_vars, 0.0);
  p.ub = Eigen::VectorXd::Constant(p.num_vars, 1.0);
  for (int i = 0; i < n_cont; ++i) {
    p.lb(i) = -5.0;
    p.ub(i) = 5.0;
  }

  Eigen::VectorXd x0(n_cont);
  for (int i = 0; i < n_cont; ++i) x0(i) = coef(rng);

  RowDraft draft;
  int z = n_cont;
  for (int gi = 0; gi < static_cast<int>(group_sizes.size()); ++gi) {
    BinaryGroup group;
    for (int e = 0; e < group_sizes[gi]; ++e, ++z) {
      group.z_vars.push_back(z);
      group.rows_per_z.emplace_back();
      const int row_count = 1 + static_cast<int>(rng() % 2);
      for (int r = 0; r < row_count; ++r) {
        const int row = draft.rows();
        group.rows_per_z.back().push_back(row);
        double axw = 0.0;
        for (int j = 0; j < n_cont; ++j) {
          const double a = coef(rng);
          draft.coeffs.emplace_back(row, j, a);
          axw += a * x0(j);
        }
        draft.coeffs.emplace_back(row, z, kBigM);
        // The first binary of each group is always satisfiable at x0, so the
        // instance has at least one feasible assignment.
        const double margin = (e == 0) ? easy(rng) : tight(rng);
        draft.rhs.push_back(kBigM + axw + margin);
      }
    }
    const int cover = draft.rows();
    for (int zv : group.z_vars) draft.coeffs.emplace_back(cover, zv, -1.0);
    draft.rhs.push_back(-1.0);
    inst.groups.push_back(std::move(group));
  }

  p.A_in.resize(draft.rows(), p.num_vars);
  p.A_in.setFromTriplets(draft.coeffs.begin(), draft.coeffs.end());
  p.b_in.resize(draft.rows());
  for (int i = 0; i < draft.rows(); ++i) p.b_in(i) = draft.rhs[i];
  p.finalize();

  for (const BinaryGroup& g : inst.groups)
    for (int zv : g.z_vars) inst.binaries.push_back(zv);
  return inst;
}

struct BestAssignment {
  bool feasible = false;
  double objective = kInf;
  Eigen::VectorXd x;
};

// Reference answer: try every 0/1 assignment and keep the best feasible one.
BestAssignment exhaustive_best(const QpProblem& problem, const std::vector<int>& binaries) {
  BestAssignment best;
  QpSettings tight;
  tight.tolerance = 1e-8;
  const int count = 1 << binaries.size();
  for (int mask = 0; mask < count; ++mask) {
    QpProblem fixed = problem;
    for (std::size_t b = 0; b < binaries.size(); ++b) {
      const double v = (mask >> b) & 1 ? 1.0 : 0.0;
      fixed.lb(binaries[b]) = v;
      fixed.ub(binaries[b]) = v;
    }
    const QpResult r = solve_qp(fixed, tight);
    if (r.status != QpStatus::optimal) continue;
    if (r.objective < best.objective) {
      best.feasible = true;
      best.objective = r.objective;
      best.x = r.x;
    }
  }
  return best;
}

// Two-sided toy: one binary forces x >= 1, the other forces x <= -1, and at
// least one must be active. Pulling toward 0.4 makes the right side cheaper.
Instance two_sided_choice() {
  Instance inst;
  QpProblem& p = inst.qp;
  p.num_vars = 3;  // x, z_right, z_left
  p.H.resize(3, 3);
  std::vector<Triplet> ht{{0, 0, 2.0}};
  p.H.setFromTriplets(ht.begin(), ht.end());
  p.g = Eigen::VectorXd::Zero(3);
  p.g(0) = -0.8;  // (x - 0.4)^2 up to a constant
  p.lb = Eigen::VectorXd::Constant(3, 0.0);
  p.ub = Eigen::VectorXd::Constant(3, 1.0);
  p.lb(0) = -10.0;
  p.ub(0) = 10.0;
  std::vector<Triplet> it{{0, 0, -1.0}, {0, 1, kBigM}, {1, 0, 1.0},
                          {1, 2, kBigM}, {2, 1, -1.0}, {2, 2, -1.0}};
  p.A_in.resize(3, 3);
  p.A_in.setFromTriplets(it.begin(), it.end());
  p.b_in.resize(3);
  p.b_in << kBigM - 1.0, kBigM - 1.0, -1.0;
  p.finalize();
  BinaryGroup g;
  g.z_vars = {1, 2};
  g.rows_per_z = {{0}, {1}};
  inst.groups = {g};
  inst.binaries = {1, 2};
  return inst;
}

}  // namespace

TEST_CASE("two sided choice picks the cheaper branch") {
  Instance inst = two_sided_choice();
  const MiqpResult r = solve_miqp(inst.qp, inst.groups);
  REQUIRE(r.status == MiqpStatus::optimal);
  // x = 1 costs 0.36, x = -1 costs 1.96 (plus the shared -0.16 offset).
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.x(2) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.objective == doctest::Approx(1.0 - 0.8).epsilon(1e-4));
  CHECK(r.gap <= 1e-4);
}

TEST_CASE("solve without binaries matches the plain qp") {
  Instance inst = two_sided_choice();
  const MiqpResult r = solve_miqp(inst.qp, {});
  QpResult plain = solve_qp(inst.qp);
  REQUIRE(r.status == MiqpStatus::optimal);
  CHECK(r.objective == plain.objective);
  CHECK((r.x - plain.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.nodes == 1);
}

TEST_CASE("contradictory disjunction is reported infeasible") {
  Instance inst = two_sided_choice();
  // Hard rows x <= -2 and x >= 2 kill both branches.
  QpProblem& p = inst.qp;
  std::vector<Triplet> it;
  for (int k = 0; k < p.A_in.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator entry(p.A_in, k); entry; ++entry)
      it.emplace_back(static_cast<int>(entry.row()), static_cast<int>(entry.col()), entry.value());
  it.emplace_back(3, 0, 1.0);
  it.emplace_back(4, 0, -1.0);
  p.A_in.resize(5, 3);
  p.A_in.setFromTriplets(it.begin(), it.end());
  Eigen::VectorXd bi(5);
  bi << p.b_in(0), p.b_in(1), p.b_in(2), -2.0, -2.0;
  p.b_in = bi;
  const MiqpResult r = solve_miqp(inst.qp, inst.groups);
  CHECK(r.status == MiqpStatus::infeasible);
}

TEST_CASE("zero node budget fails without an incumbent") {
  Instance inst = two_sided_choice();
  MiqpSettings s;
  s.node_limit = 0;
  s.root_heuristic = false;
  const MiqpResult r = solve_miqp(inst.qp, inst.groups, s);
  CHECK(r.status == MiqpStatus::failed);
}

TEST_CASE("root heuristic supplies a usable incumbent under a tiny budget") {
  Instance inst = two_sided_choice();
  MiqpSettings s;
  s.node_limit = 1;
  const MiqpResult r = solve_miqp(inst.qp, inst.groups, s);
  REQUIRE((r.status == MiqpStatus::optimal || r.status == MiqpStatus::incumbent_only));
  // Whatever the proof state, the incumbent must be a genuine 0/1 point.
  REQUIRE(r.x.size() == 3);
  for (int z : inst.binaries) {
    CHECK(std::abs(r.x(z) - std::round(r.x(z))) <= 1e-9);
  }
  CHECK(r.x(1) + r.x(2) >= 1.0 - 1e-9);
}

TEST_CASE("random disjunctive instances match exhaustive enumeration") {
  std::mt19937 rng(77);
  MiqpSettings s;
  s.rel_gap = 1e-6;
  s.qp.tolerance = 1e-8;
  for (int trial = 0; trial < 40; ++trial) {
    const int n_cont = 2 + static_cast<int>(rng() % 3);
    std::vector<int> sizes{2 + static_cast<int>(rng() % 2)};
    if (rng() % 2 == 0) sizes.push_back(2);
    Instance inst = random_disjunctive(rng, n_cont, sizes);
    const BestAssignment best = exhaustive_best(inst.qp, inst.binaries);
    // The first binary of every group is satisfiable by construction.
    REQUIRE(best.feasible);
    const MiqpResult r = solve_miqp(inst.qp, inst.groups, s);
    REQUIRE(r.status == MiqpStatus::optimal);
    const double scale = std::max(1.0, std::abs(best.objective));
    CHECK(std::abs(r.objective - best.objective) <= 1e-5 * scale);
    for (int z : inst.binaries) {
      CHECK(std::abs(r.x(z) - std::round(r.x(z))) <= 1e-9);
    }
    for (const BinaryGroup& g : inst.groups) {
      double total = 0.0;
      for (int z : g.z_vars) total += r.x(z);
      CHECK(total >= 1.0 - 1e-9);
    }
    // Activated binaries must actually satisfy their rows.
    const Eigen::VectorXd row_values = inst.qp.A_in * r.x;
    for (const BinaryGroup& g : inst.groups) {
      for (std::size_t e = 0; e < g.z_vars.size(); ++e) {
        if (r.x(g.z_vars[e]) < 0.5) continue;
        for (int row : g.rows_per_z[e]) {
          CHECK(row_values(row) <= inst.qp.b_in(row) + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("branch and bound is deterministic") {
  std::mt19937 rng(31);
  Instance inst = random_disjunctive(rng, 3, {3, 2});
  const MiqpResult a = solve_miqp(inst.qp, inst.groups);
  const MiqpResult b = solve_miqp(inst.qp, inst.groups);
  REQUIRE(a.status == b.status);
  REQUIRE(a.x.size() == b.x.size());
  for (int i = 0; i < a.x.size(); ++i) CHECK(a.x(i) == b.x(i));
  CHECK(a.objective == b.objective);
  CHECK(a.nodes == b.nodes);
}

TEST_CASE("binary index out of range throws") {
  Instance inst = two_sided_choice();
  BinaryGroup bad;
  bad.z_vars = {17};
  CHECK_THROWS_AS(solve_miqp(inst.qp, {bad}), std::invalid_argument);
}

// --- collision resolution --------------------------------------------------

namespace {

// Independent per-step poses pulled toward targets, no dynamics coupling.
struct PullProblem {
  QpProblem qp;
  std::vector<StepPoseRef> steps;
};

PullProblem pose_pull(const std::vector<Pose2D>& targets, bool mirrored) {
  PullProblem out;
  const int n = static_cast<int>(targets.size()) * 3;
  out.qp.num_vars = n;
  std::vector<Triplet> ht;
  out.qp.g = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < static_cast<int>(targets.size()); ++i) {
    StepPoseRef ref;
    ref.x_var = 3 * i;
    ref.y_var = 3 * i + 1;
    ref.theta_var = 3 * i + 2;
    ref.theta_ref = targets[i].theta;
    ref.mirrored = mirrored;
    out.steps.push_back(ref);
    const double t[3] = {targets[i].x, targets[i].y, targets[i].theta};
    for (int j = 0; j < 3; ++j) {
      ht.emplace_back(3 * i + j, 3 * i + j, 2.0);
      out.qp.g(3 * i + j) = -2.0 * t[j];
    }
  }
  out.qp.H.resize(n, n);
  out.qp.H.setFromTriplets(ht.begin(), ht.end());
  out.qp.finalize();
  return out;
}

bool executed_clear(const Eigen::VectorXd& x, const std::vector<StepPoseRef>& steps,
                    const std::vector<ConvexRegion>& regions, const VehicleParams& vehicle,
                    const Vec2& center) {
  for (const StepPoseRef& ref : steps) {
    Vec2 pos{x(ref.x_var), x(ref.y_var)};
    if (ref.mirrored) pos = Vec2{2.0 * center.x - pos.x, 2.0 * center.y - pos.y};
    const ConvexPolygon body = footprint(Pose2D{pos.x, pos.y, x(ref.theta_var)}, vehicle);
    for (const ConvexRegion& region : regions)
      if (polygons_intersect(body, region.polygon)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("straight line through a block gets pushed clear") {
  VehicleParams vehicle;
  std::vector<Pose2D> targets;
  for (double x : {-6.0, -3.0, 0.0, 3.0, 6.0}) targets.emplace_back(x, 0.0, 0.0);
  PullProblem pull = pose_pull(targets, false);
  std::vector<ConvexRegion> regions{region_from_rect(-0.5, -0.4, 0.5, 0.4, "block")};

  CollisionSet active;
  CollisionResolveSettings rs;
  rs.miqp.qp.tolerance = 1e-8;
  const CollisionResolveResult r = resolve_collisions(pull.qp, pull.steps, regions, vehicle,
                                                      Vec2{0.0, 0.0}, active, rs);
  REQUIRE(r.resolved);
  CHECK(r.iterations == 2);
  CHECK(r.group_count == 2);   // the two poses whose bodies reach over the block
  CHECK(r.binary_count == 0);  // single fixed edges suffice, nothing escalated
  CHECK(executed_clear(r.x, pull.steps, regions, vehicle, Vec2{0.0, 0.0}));
  // Clear steps stay pinned at their targets.
  CHECK(r.x(0) == doctest::Approx(-6.0).epsilon(1e-6));
  CHECK(r.x(12) == doctest::Approx(6.0).epsilon(1e-6));
  // Constrained steps moved, but not absurdly far.
  CHECK(std::abs(r.x(6) - 0.0) + std::abs(r.x(7) - 0.0) > 0.3);
  CHECK(std::abs(r.x(7)) < 3.0);
}

TEST_CASE("promotion threshold zero constrains through disjunctions") {
  VehicleParams vehicle;
  std::vector<Pose2D> targets;
  for (double x : {-6.0, -3.0, 0.0, 3.0, 6.0}) targets.emplace_back(x, 0.0, 0.0);
  PullProblem pull = pose_pull(targets, false);
  std::vector<ConvexRegion> regions{region_from_rect(-0.5, -0.4, 0.5, 0.4, "block")};

  CollisionSet active;
  CollisionResolveSettings rs;
  rs.miqp.qp.tolerance = 1e-8;
  rs.promote_offences = 0;
  const CollisionResolveResult r = resolve_collisions(pull.qp, pull.steps, regions, vehicle,
                                                      Vec2{0.0, 0.0}, active, rs);
  REQUIRE(r.resolved);
  CHECK(r.group_count == 2);
  CHECK(r.binary_count == 8);  // every pair carries the full four-edge choice
  CHECK(executed_clear(r.x, pull.steps, regions, vehicle, Vec2{0.0, 0.0}));
  CHECK(r.x(0) == doctest::Approx(-6.0).epsilon(1e-6));
}

TEST_CASE("mirrored steps constrain the executed image") {
  VehicleParams vehicle;
  const Vec2 center{2.0, 0.0};
  // Planned pose (3.5, 0) puts the executed image at (0.5, 0), inside the block.
  std::vector<Pose2D> targets{{3.5, 0.0, 0.0}};
  PullProblem pull = pose_pull(targets, true);
  std::vector<ConvexRegion> regions{region_from_rect(0.3, -0.3, 0.7, 0.3, "block")};

  CollisionSet active;
  const CollisionResolveResult r = resolve_collisions(pull.qp, pull.steps, regions, vehicle,
                                                      center, active);
  REQUIRE(r.resolved);
  CHECK(executed_clear(r.x, pull.steps, regions, vehicle, center));
  // The planned pose itself never touched the block; only its image moved it.
  const ConvexPolygon planned = footprint(Pose2D{r.x(0), r.x(1), r.x(2)}, vehicle);
  CHECK_FALSE(polygons_intersect(planned, regions[0].polygon));
}

TEST_CASE("collision memory makes the second call start constrained") {
  VehicleParams vehicle;
  std::vector<Pose2D> targets;
  for (double x : {-3.0, 0.0, 3.0}) targets.emplace_back(x, 0.0, 0.0);
  PullProblem pull = pose_pull(targets, false);
  std::vector<ConvexRegion> regions{region_from_rect(-0.4, -0.4, 0.4, 0.4, "block")};

  CollisionSet active;
  const CollisionResolveResult first = resolve_collisions(pull.qp, pull.steps, regions, vehicle,
                                                          Vec2{0.0, 0.0}, active);
  REQUIRE(first.resolved);
  REQUIRE(first.iterations > 1);
  CHECK(!active.entries.empty());

  const CollisionResolveResult second = resolve_collisions(pull.qp, pull.steps, regions, vehicle,
                                                           Vec2{0.0, 0.0}, active);
  REQUIRE(second.resolved);
  CHECK(second.iterations == 1);
}

TEST_CASE("iteration budget of one reports unresolved") {
  VehicleParams vehicle;
  std::vector<Pose2D> targets{{0.0, 0.0, 0.0}};
  PullProblem pull = pose_pull(targets, false);
  std::vector<ConvexRegion> regions{region_from_rect(-0.4, -0.4, 0.4, 0.4, "block")};

  CollisionSet active;
  CollisionResolveSettings s;
  s.max_iterations = 1;
  const CollisionResolveResult r = resolve_collisions(pull.qp, pull.steps, regions, vehicle,
                                                      Vec2{0.0, 0.0}, active, s);
  CHECK_FALSE(r.resolved);
  CHECK(r.iterations == 1);
  CHECK(!active.entries.empty());
}

TEST_CASE("pose variable out of range throws") {
  VehicleParams vehicle;
  std::vector<Pose2D> targets{{0.0, 0.0, 0.0}};
  PullProblem pull = pose_pull(targets, false);
  pull.steps[0].theta_var = 99;
  std::vector<ConvexRegion> regions{region_from_rect(-0.4, -0.4, 0.4, 0.4, "block")};
  CollisionSet active;
  CHECK_THROWS_AS(resolve_collisions(pull.qp, pull.steps, regions, vehicle, Vec2{0.0, 0.0}, active),
                  std::invalid_argument);
}
