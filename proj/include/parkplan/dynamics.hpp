#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "parkplan/scenario.hpp"

namespace parkplan {

// Full kinematic state: rear-axle position, heading, speed, and the two lagged
// actuator states (realized acceleration and front steering angle).
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double a = 0.0;
  double delta_f = 0.0;
};

// Commanded acceleration and steering, held for one integration step.
struct Command {
  double a_com = 0.0;
  double delta_com = 0.0;
};

// Optimizer state ordering. Keeping x/v and y/theta adjacent groups the
// couplings introduced by the speed-heading product terms.
inline constexpr int kStateX = 0;
inline constexpr int kStateV = 1;
inline constexpr int kStateA = 2;
inline constexpr int kStateY = 3;
inline constexpr int kStateTheta = 4;
inline constexpr int kStateDelta = 5;
inline constexpr int kStateDim = 6;
inline constexpr int kInputDim = 2;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using InputVec = Eigen::Matrix<double, kInputDim, 1>;

StateVec to_vector(const VehicleState& s);
VehicleState state_from_vector(const StateVec& v);
inline Pose2D pose_of(const VehicleState& s) { return Pose2D{s.x, s.y, s.theta}; }

// One forward-Euler step of the bicycle model with first-order actuator lag.
// All derivatives are evaluated at the incoming state; the realized actuator
// states are clamped to their limits, speed and pose are not.
VehicleState step_nonlinear(const VehicleState& s, const Command& u,
                            const VehicleParams& p, double dt);

// Rolls the model forward; returns commands.size() + 1 states, first = s0.
std::vector<VehicleState> simulate(const VehicleState& s0, const std::vector<Command>& commands,
                                   const VehicleParams& p, double dt);

// Affine one-step model xi_next = A xi + B u + c around a reference speed and
// heading. Trigonometry is expanded to first order about `trig_center`, the
// speed-heading products to first order about (v_ref, theta_ref); the speed,
// acceleration, and steering rows are exact.
struct LinearStep {
  Eigen::Matrix<double, kStateDim, kStateDim> A;
  Eigen::Matrix<double, kStateDim, kInputDim> B;
  StateVec c;
};

LinearStep linearize_step(double v_ref, double theta_ref, double trig_center,
                          const VehicleParams& p, double dt);

// Serializes a rollout. Header "t,x,y,theta,v,a,delta_f,a_com,delta_com";
// row i holds the command applied over [t_i, t_i + dt), zeros on the last row.
std::string trajectory_to_csv(const std::vector<VehicleState>& states,
                              const std::vector<Command>& commands, double dt);

}  // namespace parkplan
