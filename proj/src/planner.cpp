#include "parkplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace parkplan {
namespace {

// Decision vector: per step k in [0, N) the input u_k followed by the state
// it produces, s_{k+1}. The start state s_0 is substituted into the dynamics.
struct VarLayout {
  int horizon = 0;

  int input_var(int k) const { return (kStateDim + kInputDim) * k; }
  int state_var(int j) const { return (kStateDim + kInputDim) * (j - 1) + kInputDim; }
  int total() const { return (kStateDim + kInputDim) * horizon; }
};

// Linearization profile per state index, size horizon + 1. Position is only
// an anchor for collision edge selection; dynamics linearize on v and theta.
struct Reference {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> v;
  std::vector<double> theta;
};

double travel_direction(const ParkingScenario& sc, bool use_mirror, const VehicleState& start) {
  if (use_mirror) {
    // The approach leg of the mirrored plan runs away from the slot for a
    // parallel slot (the line sits deeper than the target) and toward it for
    // bay and angle slots (the line sits on the road).
    return sc.case_def.kind == SlotKind::parallel ? -1.0 : 1.0;
  }
  const Vec2 to_target = sc.target_pose.position() - Vec2{start.x, start.y};
  const double along = std::cos(start.theta) * to_target.x + std::sin(start.theta) * to_target.y;
  return along < 0.0 ? -1.0 : 1.0;
}

struct SpeedRange {
  double lo;
  double hi;
};

Reference warm_start(const VehicleState& start, double theta_goal, double direction,
                     const PlanSettings& ps) {
  const int n = ps.horizon;
  Reference ref;
  ref.x.resize(n + 1);
  ref.y.resize(n + 1);
  ref.v.resize(n + 1);
  ref.theta.resize(n + 1);
  ref.x[0] = start.x;
  ref.y[0] = start.y;
  ref.v[0] = start.v;
  ref.theta[0] = start.theta;
  for (int i = 1; i <= n; ++i) {
    const double ramp_up = ps.seed_accel * ps.dt * i;
    const double ramp_down = ps.seed_accel * ps.dt * (n - i);
    ref.v[i] = direction * std::min({ps.seed_speed, ramp_up, ramp_down});
    ref.theta[i] = start.theta + (theta_goal - start.theta) * static_cast<double>(i) / n;
    ref.x[i] = ref.x[i - 1] + ps.dt * ref.v[i - 1] * std::cos(ref.theta[i - 1]);
    ref.y[i] = ref.y[i - 1] + ps.dt * ref.v[i - 1] * std::sin(ref.theta[i - 1]);
  }
  return ref;
}

// Two-leg reference through the stop: the crossing point is met at the stop
// index, the virtual target by the horizon. Headings run along each leg's
// motion (against it when reversing), so the reflected image of the second
// leg already descends the slot straight and the first collision anchors
// start from a sane shape.
Reference mirror_warm_start(const VehicleState& start, const Vec2& stop, const Pose2D& goal,
                            int crossing, double direction, const SpeedRange& vr,
                            const PlanSettings& ps) {
  const int n = ps.horizon;
  Reference ref;
  ref.x.resize(n + 1);
  ref.y.resize(n + 1);
  ref.v.resize(n + 1);
  ref.theta.resize(n + 1);
  ref.x[0] = start.x;
  ref.y[0] = start.y;
  ref.v[0] = start.v;
  ref.theta[0] = start.theta;
  const double v_cap = 0.95 * std::max(std::abs(vr.lo), std::abs(vr.hi));
  const auto leg = [&](int i0, int i1, const Vec2& a, const Vec2& b) {
    const int len = i1 - i0;
    const Vec2 d{b.x - a.x, b.y - a.y};
    const double dist = std::hypot(d.x, d.y);
    const double heading =
        dist > 1e-9 ? std::atan2(direction * d.y, direction * d.x) : ref.theta[i0];
    const double speed =
        direction * std::min(dist / (static_cast<double>(len) * ps.dt), v_cap);
    for (int i = i0 + 1; i <= i1; ++i) {
      const double f = static_cast<double>(i - i0) / len;
      ref.x[i] = a.x + f * d.x;
      ref.y[i] = a.y + f * d.y;
      ref.theta[i] = heading;
      ref.v[i] = speed;
    }
  };
  leg(0, crossing, Vec2{start.x, start.y}, stop);
  leg(crossing, n, stop, Vec2{goal.x, goal.y});
  ref.v[crossing] = 0.0;
  ref.v[n] = 0.0;
  return ref;
}

SpeedRange speed_range(const ParkingScenario& sc, bool use_mirror) {
  const VehicleParams& veh = sc.vehicle;
  if (!use_mirror) return {veh.v_min, veh.v_max};
  // One travel direction per mirrored segment: the executed motion reverses
  // exactly once, at the stop.
  if (sc.case_def.kind == SlotKind::parallel) return {veh.v_min, 0.0};
  return {0.0, veh.v_max};
}

// Tracking problem toward `des` over the reference profile. `crossing` >= 1
// pins v, a, and delta_f to zero at that state and fixes its position on the
// crossing point, so the command negation downstream starts from a state
// whose sign flip is exact.
QpProblem assemble_tracking_qp(const ParkingScenario& sc, const VehicleState& start,
                               const Reference& ref, const StateVec& des, const SpeedRange& vr,
                               int crossing, const Vec2& cross_point, const PlanSettings& ps) {
  const VehicleParams& veh = sc.vehicle;
  const VarLayout lay{ps.horizon};
  const int n = ps.horizon;

  QpProblem qp;
  qp.num_vars = lay.total();

  std::vector<Eigen::Triplet<double>> ht;
  qp.g = Eigen::VectorXd::Zero(qp.num_vars);
  for (int j = 1; j <= n; ++j) {
    const double scale = j == n ? ps.weights.terminal_scale : 1.0;
    const int sv = lay.state_var(j);
    for (int d = 0; d < kStateDim; ++d) {
      const double w = scale * ps.weights.state[d];
      if (w == 0.0) continue;
      ht.emplace_back(sv + d, sv + d, 2.0 * w);
      qp.g[sv + d] -= 2.0 * w * des[d];
    }
  }
  for (int k = 0; k < n; ++k) {
    const int iv = lay.input_var(k);
    for (int j = 0; j < kInputDim; ++j) ht.emplace_back(iv + j, iv + j, 2.0 * ps.weights.input[j]);
  }
  qp.H.resize(qp.num_vars, qp.num_vars);
  qp.H.setFromTriplets(ht.begin(), ht.end());

  std::vector<Eigen::Triplet<double>> et;
  qp.b_eq = Eigen::VectorXd::Zero(kStateDim * n);
  const StateVec s0 = to_vector(start);
  for (int k = 0; k < n; ++k) {
    const LinearStep lin = linearize_step(ref.v[k], ref.theta[k], ref.theta[k], veh, ps.dt);
    const int r0 = kStateDim * k;
    for (int row = 0; row < kStateDim; ++row) et.emplace_back(r0 + row, lay.state_var(k + 1) + row, 1.0);
    if (k == 0) {
      qp.b_eq.segment<kStateDim>(r0) = lin.c + lin.A * s0;
    } else {
      for (int row = 0; row < kStateDim; ++row)
        for (int col = 0; col < kStateDim; ++col)
          if (lin.A(row, col) != 0.0) et.emplace_back(r0 + row, lay.state_var(k) + col, -lin.A(row, col));
      qp.b_eq.segment<kStateDim>(r0) = lin.c;
    }
    for (int row = 0; row < kStateDim; ++row)
      for (int j = 0; j < kInputDim; ++j)
        if (lin.B(row, j) != 0.0) et.emplace_back(r0 + row, lay.input_var(k) + j, -lin.B(row, j));
  }
  qp.A_eq.resize(kStateDim * n, qp.num_vars);
  qp.A_eq.setFromTriplets(et.begin(), et.end());

  qp.lb = Eigen::VectorXd::Constant(qp.num_vars, -kInf);
  qp.ub = Eigen::VectorXd::Constant(qp.num_vars, kInf);
  for (int k = 0; k < n; ++k) {
    const int iv = lay.input_var(k);
    qp.lb[iv] = veh.a_min;
    qp.ub[iv] = veh.a_max;
    qp.lb[iv + 1] = -veh.delta_max;
    qp.ub[iv + 1] = veh.delta_max;
  }
  for (int j = 1; j <= n; ++j) {
    const int sv = lay.state_var(j);
    qp.lb[sv + kStateV] = vr.lo;
    qp.ub[sv + kStateV] = vr.hi;
    qp.lb[sv + kStateA] = veh.a_min;
    qp.ub[sv + kStateA] = veh.a_max;
    qp.lb[sv + kStateDelta] = -veh.delta_max;
    qp.ub[sv + kStateDelta] = veh.delta_max;
  }
  if (crossing >= 1) {
    // The executed suffix is the planned one point-reflected through the stop,
    // so the stop must sit exactly on the crossing point; a soft pull loses a
    // tug-of-war against collision costs and breaks that reflection.
    const int sv = lay.state_var(crossing);
    for (const int d : {kStateV, kStateA, kStateDelta}) {
      qp.lb[sv + d] = 0.0;
      qp.ub[sv + d] = 0.0;
    }
    qp.lb[sv + kStateX] = qp.ub[sv + kStateX] = cross_point.x;
    qp.lb[sv + kStateY] = qp.ub[sv + kStateY] = cross_point.y;
  }

  qp.finalize();
  return qp;
}

std::vector<StepPoseRef> make_steps(const Reference& ref, int crossing, const PlanSettings& ps) {
  const VarLayout lay{ps.horizon};
  std::vector<StepPoseRef> steps(ps.horizon);
  for (int j = 1; j <= ps.horizon; ++j) {
    StepPoseRef& st = steps[j - 1];
    const int sv = lay.state_var(j);
    st.x_var = sv + kStateX;
    st.y_var = sv + kStateY;
    st.theta_var = sv + kStateTheta;
    st.x_ref = ref.x[j];
    st.y_ref = ref.y[j];
    st.theta_ref = ref.theta[j];
    st.mirrored = crossing >= 1 && j > crossing;
  }
  return steps;
}

std::vector<VehicleState> extract_states(const Eigen::VectorXd& x, const VehicleState& start,
                                         const PlanSettings& ps) {
  const VarLayout lay{ps.horizon};
  std::vector<VehicleState> states;
  states.reserve(ps.horizon + 1);
  states.push_back(start);
  for (int j = 1; j <= ps.horizon; ++j) {
    const StateVec sv = x.segment<kStateDim>(lay.state_var(j));
    states.push_back(state_from_vector(sv));
  }
  return states;
}

std::vector<Command> extract_commands(const Eigen::VectorXd& x, const PlanSettings& ps) {
  const VarLayout lay{ps.horizon};
  std::vector<Command> commands;
  commands.reserve(ps.horizon);
  for (int k = 0; k < ps.horizon; ++k) {
    const int iv = lay.input_var(k);
    commands.push_back(Command{x[iv], x[iv + 1]});
  }
  return commands;
}

// Steps a trapezoidal profile at the warm-start speed needs to cover `dist`,
// padded for the detour a curved approach adds over the straight line.
int estimate_stop_index(double dist, const PlanSettings& ps) {
  const double v = ps.seed_speed;
  const double a = ps.seed_accel;
  const double padded = 1.3 * dist + 0.5;
  const double t = padded >= v * v / a ? padded / v + v / a : 2.0 * std::sqrt(padded / a);
  return static_cast<int>(std::lround(t / ps.dt));
}

bool usable(MiqpStatus status) {
  return status == MiqpStatus::optimal || status == MiqpStatus::incumbent_only;
}

// The bay and angle defaults measure the offset from the target alone and can
// drop the line beyond the start pose; planning needs the start on the
// crossing side, which the corridor placement guarantees.
MirrorPolicy planning_policy(SlotKind kind) {
  return kind == SlotKind::parallel ? MirrorPolicy::band_mid : MirrorPolicy::corridor;
}

bool at_goal(const VehicleState& s, const Pose2D& target, const ParkOptions& opt) {
  const double dx = s.x - target.x;
  const double dy = s.y - target.y;
  if (dx * dx + dy * dy > opt.stop_position_tol * opt.stop_position_tol) return false;
  if (std::abs(wrap_angle(s.theta - target.theta)) > opt.stop_heading_tol) return false;
  return std::abs(s.v) <= opt.stop_speed;
}

}  // namespace

CollisionResolveSettings planning_collision_defaults() {
  CollisionResolveSettings s;
  // Parking geometry stays within tens of metres, so a tight activation
  // constant keeps the disjunction rows well scaled.
  s.big_m = 100.0;
  // The trajectory is re-anchored after every resolution pass and
  // re-linearized after every round, so a deep search buys nothing a fresh
  // incumbent would not; a short dive per pass keeps the pass affordable.
  s.miqp.node_limit = 16;
  s.miqp.rel_gap = 1e-3;
  return s;
}

void PlanSettings::validate(const VehicleParams& vehicle) const {
  if (horizon < 2) throw std::invalid_argument("plan horizon must be at least 2 steps");
  if (!(dt > 0.0)) throw std::invalid_argument("plan step length must be positive");
  // Forward-Euler actuator lag diverges once dt reaches twice the time constant.
  const double limit = 2.0 * std::min(vehicle.tau_a, vehicle.tau_delta);
  if (dt >= limit) throw std::invalid_argument("plan step length exceeds the actuator-lag stability limit");
  if (outer_iterations < 1) throw std::invalid_argument("at least one solve round is required");
  if (!(seed_speed > 0.0) || !(seed_accel > 0.0))
    throw std::invalid_argument("warm-start speed profile must be positive");
}

void ParkOptions::validate(const VehicleParams& vehicle) const {
  plan.validate(vehicle);
  if (!(sim_dt > 0.0)) throw std::invalid_argument("simulation step must be positive");
  const double ratio = plan.dt / sim_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument("plan step must be a whole multiple of the simulation step");
  if (max_replans < 1) throw std::invalid_argument("at least one planning cycle is required");
  if (!(time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
}

std::vector<Command> transform_commands(const std::vector<Command>& planned, int crossing_step) {
  std::vector<Command> out = planned;
  if (crossing_step < 0) return out;
  for (size_t k = static_cast<size_t>(crossing_step); k < out.size(); ++k) {
    out[k].a_com = -out[k].a_com;
    out[k].delta_com = -out[k].delta_com;
  }
  return out;
}

SegmentPlan plan_segment(const ParkingScenario& sc, const MirrorSpec& mirror, bool use_mirror,
                         const VehicleState& start, const PlanSettings& settings) {
  settings.validate(sc.vehicle);
  const auto t_begin = std::chrono::steady_clock::now();

  SegmentPlan plan;
  plan.mirrored = use_mirror;
  if (use_mirror && !mirror.valid) {
    plan.failure = "mirror line unavailable: " + mirror.reject_reason;
    return plan;
  }
  if (use_mirror && mirror.side({start.x, start.y}) >= 0.0) {
    plan.failure = "start is already past the mirror line";
    return plan;
  }

  const Pose2D goal_pose = use_mirror ? mirror.virtual_target : sc.target_pose;
  const double theta_goal = start.theta + wrap_angle(goal_pose.theta - start.theta);
  StateVec des = StateVec::Zero();
  des[kStateX] = goal_pose.x;
  des[kStateY] = goal_pose.y;
  des[kStateTheta] = theta_goal;

  const double direction = travel_direction(sc, use_mirror, start);
  const SpeedRange vr = speed_range(sc, use_mirror);

  std::vector<ConvexRegion> planning_regions;
  planning_regions.reserve(sc.regions.size());
  for (const ConvexRegion& r : sc.regions) planning_regions.push_back(r.inflated(settings.region_inflation));

  const Vec2 cross_point = use_mirror ? mirror.line_point : Vec2{0.0, 0.0};
  CollisionSet memory;
  Eigen::VectorXd solution;

  // The stop index is a time budget for reaching the crossing point, fixed up
  // front from the approach distance; an unreachable pick surfaces as an
  // infeasible solve and buys more steps below.
  int crossing = -1;
  if (use_mirror) {
    const double reach = std::hypot(cross_point.x - start.x, cross_point.y - start.y);
    crossing = std::clamp(estimate_stop_index(reach, settings), 5, settings.horizon - 10);
  }
  Reference ref = use_mirror
                      ? mirror_warm_start(start, cross_point, goal_pose, crossing, direction,
                                          vr, settings)
                      : warm_start(start, theta_goal, direction, settings);

  // A later round can disturb an already clean trajectory while chasing a
  // fresher linearization; the last clean round wins.
  Eigen::VectorXd snap_solution;
  double snap_objective = 0.0;
  int snap_binaries = 0;
  MiqpStatus snap_status = MiqpStatus::optimal;
  bool have_snap = false;
  int pin_bumps = 0;

  for (int round = 0; round < settings.outer_iterations; ++round) {
    const QpProblem qp =
        assemble_tracking_qp(sc, start, ref, des, vr, crossing, cross_point, settings);
    const std::vector<StepPoseRef> steps = make_steps(ref, crossing, settings);
    const CollisionResolveResult res = resolve_collisions(
        qp, steps, planning_regions, sc.vehicle, cross_point, memory, settings.collision);
    if (std::getenv("PARKPLAN_PLAN_DEBUG")) {
      std::fprintf(stderr,
                   "[plan] round=%d crossing=%d resolved=%d status=%s iters=%d groups=%d bins=%d solves=%d\n",
                   round, crossing, res.resolved, to_string(res.status), res.iterations,
                   res.group_count, res.binary_count, res.qp_solves);
      for (const auto& e : memory.entries)
        std::fprintf(stderr, "  entry step=%d region=%d(%s) offences=%d mirrored=%d\n", e.step,
                     e.region, planning_regions[e.region].label.c_str(), e.offences,
                     static_cast<int>(steps[e.step].mirrored));
    }
    plan.qp_solves += res.qp_solves;
    plan.status = res.status;
    plan.binary_count = res.binary_count;
    plan.collision_clear = res.resolved;
    if (res.status == MiqpStatus::infeasible && use_mirror && pin_bumps < 3 &&
        crossing + 8 <= settings.horizon - 10) {
      crossing += 8;
      ++pin_bumps;
      --round;
      continue;
    }
    if (!usable(res.status)) {
      plan.failure = std::string("collision resolution failed: ") + to_string(res.status);
      return plan;
    }
    solution = res.x;
    plan.objective = res.objective;

    const std::vector<VehicleState> states = extract_states(solution, start, settings);
    for (int j = 0; j <= settings.horizon; ++j) {
      ref.x[j] = states[j].x;
      ref.y[j] = states[j].y;
      ref.v[j] = states[j].v;
      ref.theta[j] = states[j].theta;
    }

    if (plan.collision_clear) {
      snap_solution = solution;
      snap_objective = plan.objective;
      snap_binaries = plan.binary_count;
      snap_status = plan.status;
      have_snap = true;
      // Once the dynamics have been relinearized around a solved trajectory,
      // a further round only churns the collision set.
      if (round >= 1) break;
    }
  }

  if (have_snap) {
    solution = snap_solution;
    plan.objective = snap_objective;
    plan.binary_count = snap_binaries;
    plan.status = snap_status;
    plan.collision_clear = true;
  }

  plan.crossing_step = use_mirror ? crossing : -1;
  plan.reference = extract_states(solution, start, settings);
  plan.planned_commands = extract_commands(solution, settings);
  plan.commands = transform_commands(plan.planned_commands, plan.crossing_step);
  plan.success = true;
  plan.plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return plan;
}

int count_switches(const std::vector<VehicleState>& trace, double hysteresis) {
  int switches = 0;
  int last_dir = 0;
  for (const VehicleState& s : trace) {
    if (std::abs(s.v) <= hysteresis) continue;
    const int dir = s.v > 0.0 ? 1 : -1;
    if (last_dir != 0 && dir != last_dir) ++switches;
    last_dir = dir;
  }
  return switches;
}

ParkOutcome decide_and_park(const ParkingScenario& sc, const ParkOptions& options) {
  options.validate(sc.vehicle);

  ParkOutcome out;
  VehicleState state;
  state.x = sc.initial_pose.x;
  state.y = sc.initial_pose.y;
  state.theta = sc.initial_pose.theta;
  out.trace.push_back(state);

  const MirrorSpec mirror = choose_mirror(sc, planning_policy(sc.case_def.kind), options.mirror);
  const int hold = static_cast<int>(std::round(options.plan.dt / options.sim_dt));
  bool mirror_done = false;  // the executed motion has passed a stop already
  int zero_progress = 0;
  double total_plan_seconds = 0.0;

  while (true) {
    if (at_goal(state, sc.target_pose, options)) {
      out.parked = true;
      out.reason = "parked";
      break;
    }
    if (out.replans >= options.max_replans) {
      out.reason = "replan_limit";
      break;
    }
    if (out.duration >= options.time_limit) {
      out.reason = "time_limit";
      break;
    }

    const bool use_mirror =
        mirror.valid && !mirror_done && mirror.side({state.x, state.y}) < 0.0;
    SegmentPlan seg = plan_segment(sc, mirror, use_mirror, state, options.plan);
    if (!seg.success && use_mirror) {
      const double mirrored_seconds = seg.plan_seconds;
      seg = plan_segment(sc, mirror, false, state, options.plan);
      seg.plan_seconds += mirrored_seconds;
    }
    ++out.replans;
    total_plan_seconds += seg.plan_seconds;
    out.max_plan_seconds = std::max(out.max_plan_seconds, seg.plan_seconds);
    if (!seg.success) {
      out.reason = "plan_failed: " + seg.failure;
      break;
    }

    int steps_taken = 0;
    bool reached = false;
    bool truncated = false;
    bool timed_out = false;
    for (size_t k = 0; k < seg.commands.size() && !reached && !truncated && !timed_out; ++k) {
      for (int h = 0; h < hold; ++h) {
        const VehicleState next = step_nonlinear(state, seg.commands[k], sc.vehicle, options.sim_dt);
        if (!collision_free(pose_of(next), sc.vehicle, sc.regions)) {
          truncated = true;
          break;
        }
        state = next;
        out.duration += options.sim_dt;
        out.trace.push_back(state);
        out.trace_commands.push_back(seg.commands[k]);
        ++steps_taken;
        if (at_goal(state, sc.target_pose, options)) {
          reached = true;
          break;
        }
        if (out.duration >= options.time_limit) {
          timed_out = true;
          break;
        }
      }
    }

    if (seg.crossing_step >= 0 && steps_taken > seg.crossing_step * hold) mirror_done = true;
    if (truncated) ++out.collision_truncations;
    if (reached) {
      out.parked = true;
      out.reason = "parked";
      break;
    }
    if (timed_out) {
      out.reason = "time_limit";
      break;
    }
    if (steps_taken == 0) {
      // A plan whose very first step collides would replan from the same
      // state forever; two strikes end the attempt.
      if (++zero_progress >= 2) {
        out.reason = "no_progress";
        break;
      }
    } else {
      zero_progress = 0;
    }
  }

  out.final_state = state;
  out.switches = count_switches(out.trace, options.switch_hysteresis);
  if (out.replans > 0) out.mean_plan_seconds = total_plan_seconds / out.replans;
  return out;
}

}  // namespace parkplan
