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

#include "klc/rollout.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "klc/errors.hpp"

namespace klc {

Trajectory rollout_noise_driven(const DynamicsModel& dyn,
                                const NoiseModel& noise,
                                const Eigen::VectorXd& x0, int k0,
                                const Horizon& horizon, RngStream& rng) {
  const int N = horizon.final_stage();
  if (k0 < 0 || k0 > N) {
    throw std::invalid_argument("rollout_noise_driven: start stage outside [0, N]");
  }
  if (!x0.allFinite()) {
    throw std::invalid_argument("rollout_noise_driven: non-finite initial state");
  }

  Trajectory traj;
  traj.start_stage = k0;
  traj.states.reserve(N - k0 + 1);
  traj.controls.reserve(N - k0);
  traj.states.push_back(x0);

  Eigen::VectorXd w(noise.dim());
  Eigen::VectorXd next(dyn.state_dim);
  for (int s = k0; s < N; ++s) {
    noise.sample_into(s, rng, w);
    dyn.step_into(traj.states.back(), w, next);
    if (!next.allFinite()) throw RolloutDiverged(s + 1);
    traj.controls.push_back(w);
    traj.states.push_back(next);
  }
  return traj;
}

double path_cost(const CostSchedule& costs, const Trajectory& traj, int k0) {
  const int N = costs.horizon().final_stage();
  if (k0 < traj.start_stage || traj.final_stage() != N) {
    throw std::invalid_argument("path_cost: trajectory does not span stages k0..N");
  }
  double total = 0.0;
  for (int s = k0; s <= N; ++s) {
    total += costs.at(s, traj.states[s - traj.start_stage]);
  }
  if (!std::isfinite(total)) {
    throw Error("path_cost: non-finite stage cost along the path");
  }
  return total;
}

namespace detail {

double log_path_weight(const DynamicsModel& dyn, const NoiseModel& noise,
                       const CostSchedule& costs, int k,
                       const Eigen::VectorXd& x, RngStream& rng,
                       RolloutScratch& scratch) {
  constexpr double kDead = -std::numeric_limits<double>::infinity();
  const int N = costs.horizon().final_stage();

  scratch.state = x;
  double total = 0.0;
  for (int s = k; s < N; ++s) {
    total += costs.at(s, scratch.state);
    noise.sample_into(s, rng, scratch.noise);
    dyn.step_into(scratch.state, scratch.noise, scratch.next_state);
    if (!scratch.next_state.allFinite()) return kDead;
    scratch.state.swap(scratch.next_state);
  }
  total += costs.at(N, scratch.state);
  return std::isfinite(total) ? -total : kDead;
}

}  // namespace detail
}  // namespace klc
