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

#include "klc/problem.hpp"

#include <memory>
#include <stdexcept>
#include <utility>

namespace klc {

Horizon::Horizon(int final_stage) : final_stage_(final_stage) {
  if (final_stage < 1) {
    throw std::invalid_argument("Horizon: final stage must be >= 1");
  }
}

Eigen::VectorXd DynamicsModel::step(const Eigen::VectorXd& state,
                                    const Eigen::VectorXd& input) const {
  Eigen::VectorXd next(state_dim);
  step_into(state, input, next);
  return next;
}

DynamicsModel make_linear_dynamics(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("make_linear_dynamics: A must be square");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument("make_linear_dynamics: A and B row counts differ");
  }
  DynamicsModel model;
  model.state_dim = static_cast<int>(A.rows());
  model.input_dim = static_cast<int>(B.cols());
  model.step_into = [A, B](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           Eigen::VectorXd& next) {
    next.noalias() = A * x;
    next.noalias() += B * u;
  };
  return model;
}

CostSchedule::CostSchedule(Horizon horizon, RunningCost running,
                           TerminalCost terminal)
    : horizon_(horizon),
      running_(std::move(running)),
      terminal_(std::move(terminal)) {
  if (!running_ || !terminal_) {
    throw std::invalid_argument("CostSchedule: missing cost callable");
  }
}

double CostSchedule::at(int stage, const Eigen::VectorXd& x) const {
  const int N = horizon_.final_stage();
  if (stage < 0 || stage > N) {
    throw std::out_of_range("CostSchedule::at: stage outside [0, N]");
  }
  return stage == N ? terminal_(x) : running_(stage, x);
}

CostSchedule make_quadratic_cost(Horizon horizon,
                                 std::vector<Eigen::MatrixXd> stage_weights) {
  const int N = horizon.final_stage();
  if (static_cast<int>(stage_weights.size()) != N + 1) {
    throw std::invalid_argument(
        "make_quadratic_cost: need one weight matrix per stage 0..N");
  }
  auto weights = std::make_shared<std::vector<Eigen::MatrixXd>>(
      std::move(stage_weights));
  auto quad = [weights](int k, const Eigen::VectorXd& x) {
    return 0.5 * x.dot((*weights)[k] * x);
  };
  const int terminal_index = N;
  return CostSchedule(
      horizon, quad,
      [weights, terminal_index](const Eigen::VectorXd& x) {
        return 0.5 * x.dot((*weights)[terminal_index] * x);
      });
}

CostSchedule make_quadratic_cost(Horizon horizon, const Eigen::MatrixXd& Q) {
  return CostSchedule(
      horizon,
      [Q](int, const Eigen::VectorXd& x) { return 0.5 * x.dot(Q * x); },
      [Q](const Eigen::VectorXd& x) { return 0.5 * x.dot(Q * x); });
}

CostSchedule make_zero_cost(Horizon horizon) {
  return CostSchedule(
      horizon, [](int, const Eigen::VectorXd&) { return 0.0; },
      [](const Eigen::VectorXd&) { return 0.0; });
}

}  // namespace klc
