#pragma once

#include <vector>

#include "parkplan/qp.hpp"
#include "parkplan/scenario.hpp"

namespace parkplan {

// One disjunction: at least one of the listed 0/1 variables must be 1.
// rows_per_z lists, per binary, the A_in rows that its activation tightens;
// the heuristics use them to score how comfortably an edge separates.
struct BinaryGroup {
  std::vector<int> z_vars;
  std::vector<std::vector<int>> rows_per_z;
};

enum class MiqpStatus {
  optimal,        // proven within the relative gap
  incumbent_only, // node or iteration budget hit with a feasible point in hand
  infeasible,     // no 0/1 assignment satisfies the constraints
  failed,         // budget hit before any feasible point was found
};

const char* to_string(MiqpStatus status);

struct MiqpSettings {
  double rel_gap = 1e-4;    // |incumbent - bound| / max(1, |incumbent|)
  int node_limit = 400;
  double int_tol = 1e-6;    // distance from {0,1} treated as integral
  bool root_heuristic = true;
  QpSettings qp;
};

struct MiqpResult {
  MiqpStatus status = MiqpStatus::failed;
  Eigen::VectorXd x;
  double objective = 0.0;
  double bound = -kInf;     // best proven lower bound
  double gap = kInf;
  int nodes = 0;
  int qp_solves = 0;
};

// Best-bound branch and bound on the binaries named by the groups. The
// continuous relaxation is solved by the interior point; branching picks the
// most fractional binary. Deterministic: ties break on the lowest variable
// index and the node creation order.
MiqpResult solve_miqp(const QpProblem& problem, const std::vector<BinaryGroup>& groups,
                      const MiqpSettings& settings = {});

// --- Collision resolution -------------------------------------------------

// Where one trajectory step's pose lives in the decision vector, and whether
// the executed pose is the point reflection of the planned one. The reference
// pose anchors the first-iteration edge selection and rotation affinization;
// later iterations re-anchor on the solved poses.
struct StepPoseRef {
  int x_var = -1;
  int y_var = -1;
  int theta_var = -1;
  double x_ref = 0.0;
  double y_ref = 0.0;
  double theta_ref = 0.0;
  bool mirrored = false;
};

struct CollisionResolveSettings {
  int max_iterations = 10;
  double big_m = 1000.0;
  double separation_margin = 0.01;  // clearance demanded beyond each region edge
  double repeat_inflation = 0.05;   // extra edge offset per repeated violation
  // A fresh pair is held behind the single region edge with the best
  // clearance at its anchor pose, which costs no binaries. Once its offence
  // count reaches this threshold the pair graduates to the full disjunction
  // over every region edge.
  int promote_offences = 2;
  // Cost weight of the per-pair clearance shortfall, applied both linearly
  // and quadratically. The slack keeps the constrained problem solvable when
  // the frozen heading references cannot honour a full separation yet;
  // leftover shortfall fails the exact check and is squeezed out across
  // re-linearizations.
  double soft_weight = 1000.0;
  // Largest shortfall a pair may buy. An edge needing more than this within
  // one linearization is treated as unavailable, so search prunes such
  // choices instead of chasing extreme, badly conditioned optima.
  double slack_cap = 2.0;
  MiqpSettings miqp;
};

struct CollisionResolveResult {
  bool resolved = false;        // final trajectory passes the exact check
  MiqpStatus status = MiqpStatus::failed;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  int group_count = 0;          // (step, region) pairs constrained
  int binary_count = 0;
  int qp_solves = 0;
};

// Memory of which (step, region) pairs needed constraints, kept across
// re-linearizations so constraints never silently disappear.
struct CollisionSet {
  struct Entry {
    int step = 0;
    int region = 0;
    int offences = 0;  // exact-check failures seen while already constrained
  };
  std::vector<Entry> entries;

  bool contains(int step, int region) const;
  Entry* find(int step, int region);
  void add(int step, int region);
};

// Iterative narrowing: solve without collision rows, check the exact swept
// footprints against the regions, constrain the offending (step, region)
// pairs, and re-solve until clean or out of budget. Fresh pairs are pushed
// past their best-clearance edge; repeat offenders get the edge disjunction
// with binaries. Pose extraction uses exact trigonometry; mirrored steps
// check the executed image reflected through `reflect_center`. `active`
// accumulates across calls, so earlier offenders stay constrained after
// re-linearization.
CollisionResolveResult resolve_collisions(const QpProblem& base,
                                          const std::vector<StepPoseRef>& steps,
                                          const std::vector<ConvexRegion>& regions,
                                          const VehicleParams& vehicle,
                                          const Vec2& reflect_center,
                                          CollisionSet& active,
                                          const CollisionResolveSettings& settings = {});

}  // namespace parkplan
