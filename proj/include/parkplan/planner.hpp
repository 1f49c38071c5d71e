#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "parkplan/dynamics.hpp"
#include "parkplan/miqp.hpp"
#include "parkplan/mirror.hpp"
#include "parkplan/scenario.hpp"

namespace parkplan {

// Quadratic tracking weights in the optimizer state order (x, v, a, y, theta,
// delta_f) and the input order (a_com, delta_com).
struct PlannerWeights {
  StateVec state = (StateVec() << 1.0, 0.1, 0.01, 1.0, 2.0, 0.01).finished();
  InputVec input = (InputVec() << 0.1, 0.5).finished();
  double terminal_scale = 50.0;  // terminal state weight = scale * state weight
};

// Collision budgets trimmed for planning: the trajectory is re-linearized
// after every resolution anyway, so a deep disjunction tree buys little.
CollisionResolveSettings planning_collision_defaults();

struct PlanSettings {
  int horizon = 100;  // steps per segment
  double dt = 0.1;    // step length; must stay below the actuator-lag stability limit
  int outer_iterations = 3;  // relinearization rounds per segment
  double seed_accel = 1.0;   // ramp slope of the warm-start speed profile
  double seed_speed = 1.5;   // plateau of the warm-start speed profile
  double region_inflation = 0.05;  // planning-only margin added to every region
  PlannerWeights weights;
  CollisionResolveSettings collision = planning_collision_defaults();

  // Throws std::invalid_argument on non-physical values.
  void validate(const VehicleParams& vehicle) const;
};

// One optimized segment. In mirror mode the plan drives toward the virtual
// target and stops (v = a = delta_f = 0) at the crossing step; negating the
// commands from that step on makes the executed motion re-trace the position
// path point-reflected through the stop, so it approaches the real target.
struct SegmentPlan {
  bool success = false;
  std::string failure;  // set when success is false
  MiqpStatus status = MiqpStatus::failed;
  bool mirrored = false;      // aimed at the virtual target
  int crossing_step = -1;     // stop state index in [1, horizon], -1 when none
  bool collision_clear = false;  // final trajectory passed the exact footprint check

  std::vector<VehicleState> reference;    // linear-model states, [0] = start
  std::vector<Command> planned_commands;  // toward the (possibly virtual) target
  std::vector<Command> commands;          // executable: negated from the stop on

  double objective = 0.0;
  int qp_solves = 0;
  int binary_count = 0;
  double plan_seconds = 0.0;  // wall clock; the only non-deterministic field
};

// Sign-flips both command fields from index `crossing_step` on; identity when
// the index is negative. Command k is the one applied while leaving state k.
std::vector<Command> transform_commands(const std::vector<Command>& planned, int crossing_step);

// Plans one segment from `start`. With `use_mirror` set the target is the
// mirror's virtual target, speed is restricted to the approach direction of
// the slot kind, and the crossing stop is pinned once detected. Collision
// constraints are grown iteratively from exact footprint checks against the
// inflated regions; mirrored steps constrain the executed image.
SegmentPlan plan_segment(const ParkingScenario& sc, const MirrorSpec& mirror, bool use_mirror,
                         const VehicleState& start, const PlanSettings& settings = {});

struct ParkOptions {
  PlanSettings plan;
  MirrorOptions mirror;
  int max_replans = 12;   // planning cycles before giving up
  double sim_dt = 0.05;   // execution integration step; plan.dt must be a multiple
  double time_limit = 180.0;  // simulated seconds
  // Goal test on the executed state: rear-axle distance, heading error, speed.
  double stop_position_tol = 0.1;
  double stop_heading_tol = 3.0 * std::numbers::pi / 180.0;
  double stop_speed = 0.01;
  // Speed magnitude that must be exceeded before a sign change counts as a
  // direction switch.
  double switch_hysteresis = 0.02;

  void validate(const VehicleParams& vehicle) const;
};

struct ParkOutcome {
  bool parked = false;
  std::string reason;  // "parked", "plan_failed", "replan_limit", "time_limit", "no_progress"
  VehicleState final_state;
  std::vector<VehicleState> trace;      // executed states, sim_dt apart, [0] = start
  std::vector<Command> trace_commands;  // command held over each trace interval
  double duration = 0.0;                // simulated seconds
  int replans = 0;                      // planning cycles run
  int switches = 0;                     // executed direction reversals
  int collision_truncations = 0;        // segments cut short by the footprint check
  double mean_plan_seconds = 0.0;       // wall clock; non-deterministic
  double max_plan_seconds = 0.0;
};

// Parks by alternating planning and simulated execution. The first segments
// use the mirror scheme; once the executed motion has passed its stop (or the
// mirror is unusable) the remaining segments drive at the target directly.
// Execution is cut at the last collision-free state and triggers a replan.
ParkOutcome decide_and_park(const ParkingScenario& sc, const ParkOptions& options = {});

// Direction reversals in an executed state sequence, with hysteresis.
int count_switches(const std::vector<VehicleState>& trace, double hysteresis);

}  // namespace parkplan
