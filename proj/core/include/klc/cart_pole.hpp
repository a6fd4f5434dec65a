// Copyright 2026 The klcontrol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KLC_CART_POLE_HPP_
#define KLC_CART_POLE_HPP_

#include <Eigen/Dense>

#include "klc/problem.hpp"

namespace klc {

// Cart-pole on a frictionless track: a cart pushed by a horizontal force
// carries a massless rod with a point mass at the tip. Angle 0 is upright
// and is left unwrapped, since the stage cost penalizes |angle| directly.
struct CartPoleParams {
  double cart_mass = 1.0;    // kg
  double point_mass = 0.1;   // kg
  double rod_length = 1.0;   // m
  double gravity = 9.8;      // m/s^2
  double time_step = 0.05;   // s
};

struct CartPoleState {
  double position = 0.0;      // m
  double velocity = 0.0;      // m/s
  double angle = 0.0;         // rad
  double angular_rate = 0.0;  // rad/s
};

struct CartPoleAccelerations {
  double linear = 0.0;   // m/s^2
  double angular = 0.0;  // rad/s^2
};

/// Cart and pole accelerations under force u:
///   linear  = (-m L w^2 sin t + m g sin t cos t + u) / (M + m sin^2 t)
///   angular = (linear cos t + g sin t) / L
/// with t = angle, w = angular_rate. The denominator is at least M, so the
/// formulas are total.
CartPoleAccelerations accelerations(const CartPoleParams& p, double angle,
                                    double angular_rate, double force);

/// Explicit Euler update with step tau: positions advance by tau * current
/// velocity, velocities by tau * acceleration.
CartPoleState euler_step(const CartPoleParams& p, const CartPoleState& state,
                         double force);

/// Weighted absolute-value cost w0|pos| + w1|vel| + w2|angle| + w3|rate|.
double stage_cost(const Eigen::Vector4d& weights, const CartPoleState& state);

/// The cost weights used by the balancing experiment.
Eigen::Vector4d default_cart_pole_weights();

/// State vector layout: (position, velocity, angle, angular_rate); input is
/// the scalar force. Throws if any parameter is not strictly positive.
DynamicsModel make_cart_pole_dynamics(const CartPoleParams& p);

/// stage_cost applied at every stage, terminal included.
CostSchedule make_cart_pole_cost(const Eigen::Vector4d& weights,
                                 Horizon horizon);

}  // namespace klc

#endif  // KLC_CART_POLE_HPP_
