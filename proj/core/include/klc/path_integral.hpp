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

#ifndef KLC_PATH_INTEGRAL_HPP_
#define KLC_PATH_INTEGRAL_HPP_

#include <Eigen/Dense>

#include "klc/noise.hpp"
#include "klc/problem.hpp"
#include "klc/rng.hpp"

namespace klc {

/// Monte-Carlo estimate of log Z(k,x), the log desirability. The value
/// function estimate is -log_z. std_error_log is a delta-method standard
/// error for log_z; log_weight_spread (max - min finite log weight) flags
/// weight degeneracy.
struct DesirabilityEstimate {
  double log_z = 0.0;
  int sample_count = 0;
  double log_weight_spread = 0.0;
  double std_error_log = 0.0;
};

/// One control drawn from the estimated optimal policy, with the normalized
/// candidate weights it was selected from. effective_sample_size = 1 / sum of
/// squared weights, in [1, candidate_count].
struct PolicySample {
  Eigen::VectorXd control;
  int candidate_count = 0;
  Eigen::VectorXd normalized_weights;
  double effective_sample_size = 0.0;
};

/// Estimates log Z(k,x) as a log-mean-exp over S independent noise-driven
/// path weights exp(-total path cost). At k = N no paths are needed and the
/// result is exactly -l_N(x).
///
/// Sample i always draws from rng.substream(i), and the reduction runs in
/// index order, so the result is a deterministic function of (rng, S) alone:
/// bit-identical across runs and across worker counts. Throws
/// EstimationFailed when every sampled weight vanishes.
DesirabilityEstimate estimate_log_desirability(const DynamicsModel& dyn,
                                               const NoiseModel& noise,
                                               const CostSchedule& costs,
                                               int k, const Eigen::VectorXd& x,
                                               int S, const RngStream& rng,
                                               int workers = 1);

/// Draws one control from the optimal policy at (k, x) by self-normalized
/// importance sampling: M candidates from the stage-k noise law, weighted by
/// estimated Z(k+1, f(x, candidate)), one selected by inverse CDF.
///
/// All candidates share the same inner rollout streams (common random
/// numbers), which cancels common path noise in the weight ratios. Stream
/// layout: rng.substream(0) drives candidate draws, substream(1) the shared
/// inner estimates, substream(2) the selection uniform. Throws
/// EstimationFailed when every candidate weight vanishes.
PolicySample sample_optimal_control_snis(const DynamicsModel& dyn,
                                         const NoiseModel& noise,
                                         const CostSchedule& costs, int k,
                                         const Eigen::VectorXd& x, int M,
                                         int S_inner, const RngStream& rng,
                                         int workers = 1);

inline constexpr int kDefaultPolicyCandidates = 64;
inline constexpr int kDefaultPolicyInnerSamples = 256;

}  // namespace klc

#endif  // KLC_PATH_INTEGRAL_HPP_
