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

#include "klc/cart_pole.hpp"

#include <cmath>
#include <stdexcept>

namespace klc {
namespace {

void require_valid(const CartPoleParams& p) {
  if (p.cart_mass <= 0.0 || p.point_mass <= 0.0 || p.rod_length <= 0.0 ||
      p.gravity <= 0.0 || p.time_step <= 0.0) {
    throw std::invalid_argument("CartPoleParams: all parameters must be positive");
  }
}

}  // namespace

CartPoleAccelerations accelerations(const CartPoleParams& p, double angle,
                                    double angular_rate, double force) {
  const double s = std::sin(angle);
  const double c = std::cos(angle);
  CartPoleAccelerations acc;
  acc.linear = (-p.point_mass * p.rod_length * angular_rate * angular_rate * s +
                p.point_mass * p.gravity * s * c + force) /
               (p.cart_mass + p.point_mass * s * s);
  acc.angular = (acc.linear * c + p.gravity * s) / p.rod_length;
  return acc;
}

CartPoleState euler_step(const CartPoleParams& p, const CartPoleState& state,
                         double force) {
  const CartPoleAccelerations acc =
      accelerations(p, state.angle, state.angular_rate, force);
  CartPoleState next;
  next.position = state.position + p.time_step * state.velocity;
  next.velocity = state.velocity + p.time_step * acc.linear;
  next.angle = state.angle + p.time_step * state.angular_rate;
  next.angular_rate = state.angular_rate + p.time_step * acc.angular;
  return next;
}

double stage_cost(const Eigen::Vector4d& weights, const CartPoleState& state) {
  return weights[0] * std::abs(state.position) +
         weights[1] * std::abs(state.velocity) +
         weights[2] * std::abs(state.angle) +
         weights[3] * std::abs(state.angular_rate);
}

Eigen::Vector4d default_cart_pole_weights() {
  return Eigen::Vector4d(7.0, 2.5, 7.0, 2.5);
}

DynamicsModel make_cart_pole_dynamics(const CartPoleParams& p) {
  require_valid(p);
  DynamicsModel model;
  model.state_dim = 4;
  model.input_dim = 1;
  model.step_into = [p](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        Eigen::VectorXd& next) {
    const CartPoleAccelerations acc = accelerations(p, x[2], x[3], u[0]);
    next.resize(4);
    next[0] = x[0] + p.time_step * x[1];
    next[1] = x[1] + p.time_step * acc.linear;
    next[2] = x[2] + p.time_step * x[3];
    next[3] = x[3] + p.time_step * acc.angular;
  };
  return model;
}

CostSchedule make_cart_pole_cost(const Eigen::Vector4d& weights,
                                 Horizon horizon) {
  auto cost = [weights](const Eigen::VectorXd& x) {
    return weights[0] * std::abs(x[0]) + weights[1] * std::abs(x[1]) +
           weights[2] * std::abs(x[2]) + weights[3] * std::abs(x[3]);
  };
  return CostSchedule(
      horizon, [cost](int, const Eigen::VectorXd& x) { return cost(x); },
      cost);
}

}  // namespace klc
