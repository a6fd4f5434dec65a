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

#ifndef KLC_ROLLOUT_HPP_
#define KLC_ROLLOUT_HPP_

#include <Eigen/Dense>

#include "klc/noise.hpp"
#include "klc/problem.hpp"
#include "klc/rng.hpp"

namespace klc {

/// Simulates the noise-driven system x_{s+1} = f(x_s, w_s) from stage k0 to
/// the horizon, with each w_s drawn from the noise model at stage s. Throws
/// RolloutDiverged if a step leaves the finite range.
Trajectory rollout_noise_driven(const DynamicsModel& dyn,
                                const NoiseModel& noise,
                                const Eigen::VectorXd& x0, int k0,
                                const Horizon& horizon, RngStream& rng);

/// Sum of stage costs l_s(x_s) for s = k0..N along a stored path. The
/// trajectory must cover those stages; a non-finite cost raises Error.
double path_cost(const CostSchedule& costs, const Trajectory& traj, int k0);

namespace detail {

/// Reusable buffers for the fused rollout below, so hot loops never allocate.
struct RolloutScratch {
  Eigen::VectorXd state;
  Eigen::VectorXd next_state;
  Eigen::VectorXd noise;
};

/// One noise-driven path from x at stage k, accumulating costs on the fly.
/// Returns -sum of stage costs (the log path weight), or -infinity when the
/// path or a cost leaves the finite range. Never throws for divergence; the
/// caller decides whether a vanished weight is fatal.
double log_path_weight(const DynamicsModel& dyn, const NoiseModel& noise,
                       const CostSchedule& costs, int k,
                       const Eigen::VectorXd& x, RngStream& rng,
                       RolloutScratch& scratch);

}  // namespace detail
}  // namespace klc

#endif  // KLC_ROLLOUT_HPP_
