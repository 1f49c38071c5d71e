#include "parkplan/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace parkplan {

StateVec to_vector(const VehicleState& s) {
  StateVec v;
  v[kStateX] = s.x;
  v[kStateV] = s.v;
  v[kStateA] = s.a;
  v[kStateY] = s.y;
  v[kStateTheta] = s.theta;
  v[kStateDelta] = s.delta_f;
  return v;
}

VehicleState state_from_vector(const StateVec& v) {
  VehicleState s;
  s.x = v[kStateX];
  s.v = v[kStateV];
  s.a = v[kStateA];
  s.y = v[kStateY];
  s.theta = v[kStateTheta];
  s.delta_f = v[kStateDelta];
  return s;
}

VehicleState step_nonlinear(const VehicleState& s, const Command& u,
                            const VehicleParams& p, double dt) {
  VehicleState n;
  n.x = s.x + s.v * std::cos(s.theta) * dt;
  n.y = s.y + s.v * std::sin(s.theta) * dt;
  n.theta = s.theta + s.v * std::tan(s.delta_f) / p.wheelbase * dt;
  n.v = s.v + s.a * dt;
  n.a = s.a + (u.a_com - s.a) / p.tau_a * dt;
  n.delta_f = s.delta_f + (u.delta_com - s.delta_f) / p.tau_delta * dt;
  n.a = std::clamp(n.a, p.a_min, p.a_max);
  n.delta_f = std::clamp(n.delta_f, -p.delta_max, p.delta_max);
  return n;
}

std::vector<VehicleState> simulate(const VehicleState& s0, const std::vector<Command>& commands,
                                   const VehicleParams& p, double dt) {
  std::vector<VehicleState> states;
  states.reserve(commands.size() + 1);
  states.push_back(s0);
  for (const Command& u : commands) {
    states.push_back(step_nonlinear(states.back(), u, p, dt));
  }
  return states;
}

LinearStep linearize_step(double v_ref, double theta_ref, double trig_center,
                          const VehicleParams& p, double dt) {
  const double ca = std::cos(trig_center);
  const double sa = std::sin(trig_center);
  // cos(theta) ~ ca - sa (theta - A), sin(theta) ~ sa + ca (theta - A),
  // v*theta ~ v_ref*theta + theta_ref*v - v_ref*theta_ref.
  const double gamma1 = ca + trig_center * sa - theta_ref * sa;
  const double gamma2 = sa - trig_center * ca + theta_ref * ca;

  LinearStep step;
  step.A.setIdentity();
  step.B.setZero();
  step.c.setZero();

  step.A(kStateX, kStateV) = gamma1 * dt;
  step.A(kStateX, kStateTheta) = -v_ref * sa * dt;
  step.c[kStateX] = v_ref * theta_ref * sa * dt;

  step.A(kStateY, kStateV) = gamma2 * dt;
  step.A(kStateY, kStateTheta) = v_ref * ca * dt;
  step.c[kStateY] = -v_ref * theta_ref * ca * dt;

  step.A(kStateV, kStateA) = dt;

  step.A(kStateA, kStateA) = 1.0 - dt / p.tau_a;
  step.B(kStateA, 0) = dt / p.tau_a;

  step.A(kStateTheta, kStateDelta) = v_ref / p.wheelbase * dt;

  step.A(kStateDelta, kStateDelta) = 1.0 - dt / p.tau_delta;
  step.B(kStateDelta, 1) = dt / p.tau_delta;

  return step;
}

std::string trajectory_to_csv(const std::vector<VehicleState>& states,
                              const std::vector<Command>& commands, double dt) {
  if (!states.empty() && commands.size() + 1 != states.size()) {
    throw std::invalid_argument("trajectory_to_csv: need one command per transition");
  }
  std::string out = "t,x,y,theta,v,a,delta_f,a_com,delta_com\n";
  char buf[32];
  auto append = [&](double v, char sep) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
    out += sep;
  };
  for (size_t i = 0; i < states.size(); ++i) {
    const VehicleState& s = states[i];
    const Command u = i < commands.size() ? commands[i] : Command{};
    append(static_cast<double>(i) * dt, ',');
    append(s.x, ',');
    append(s.y, ',');
    append(s.theta, ',');
    append(s.v, ',');
    append(s.a, ',');
    append(s.delta_f, ',');
    append(u.a_com, ',');
    append(u.delta_com, '\n');
  }
  return out;
}

}  // namespace parkplan
