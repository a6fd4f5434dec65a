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

#include "klc/path_integral.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "klc/errors.hpp"
#include "klc/numeric.hpp"
#include "klc/parallel.hpp"
#include "klc/rollout.hpp"

namespace klc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

DesirabilityEstimate estimate_log_desirability(const DynamicsModel& dyn,
                                               const NoiseModel& noise,
                                               const CostSchedule& costs,
                                               int k, const Eigen::VectorXd& x,
                                               int S, const RngStream& rng,
                                               int workers) {
  const int N = costs.horizon().final_stage();
  if (S < 1) {
    throw std::invalid_argument("estimate_log_desirability: need S >= 1");
  }
  if (k < 0 || k > N) {
    throw std::invalid_argument("estimate_log_desirability: stage outside [0, N]");
  }

  DesirabilityEstimate est;
  est.sample_count = S;

  if (k == N) {
    // Paths are length zero: Z(N,x) = exp(-l_N(x)) with no sampling error.
    const double terminal = costs.at(N, x);
    if (!std::isfinite(terminal)) {
      throw EstimationFailed(
          "estimate_log_desirability: non-finite terminal cost", k);
    }
    est.log_z = -terminal;
    return est;
  }

  std::vector<double> log_weights(static_cast<std::size_t>(S));
  parallel_for(
      static_cast<std::size_t>(S), workers,
      [&](std::size_t i) {
        thread_local detail::RolloutScratch scratch;
        RngStream path_rng = rng.substream(static_cast<std::uint64_t>(i));
        log_weights[i] =
            detail::log_path_weight(dyn, noise, costs, k, x, path_rng, scratch);
      });

  const LogWeightStats stats = log_weight_statistics(log_weights);
  if (stats.finite_count == 0 || stats.log_mean == kNegInf) {
    throw EstimationFailed("estimate_log_desirability: every path weight vanished",
                           k);
  }
  est.log_z = stats.log_mean;
  est.log_weight_spread = stats.spread;
  est.std_error_log = stats.std_error;
  return est;
}

PolicySample sample_optimal_control_snis(const DynamicsModel& dyn,
                                         const NoiseModel& noise,
                                         const CostSchedule& costs, int k,
                                         const Eigen::VectorXd& x, int M,
                                         int S_inner, const RngStream& rng,
                                         int workers) {
  const int N = costs.horizon().final_stage();
  if (M < 2) {
    throw std::invalid_argument("sample_optimal_control_snis: need M >= 2");
  }
  if (S_inner < 1) {
    throw std::invalid_argument("sample_optimal_control_snis: need S_inner >= 1");
  }
  if (k < 0 || k >= N) {
    throw std::invalid_argument("sample_optimal_control_snis: stage outside [0, N-1]");
  }
  if (noise.kind() != NoiseModel::Kind::kGaussian) {
    throw std::invalid_argument(
        "sample_optimal_control_snis: continuous noise model required");
  }

  const RngStream candidate_base = rng.substream(0);
  const RngStream inner_base = rng.substream(1);

  // Candidates are proposals from the stage-k noise law, so the importance
  // weight of candidate j is just its desirability Z(k+1, f(x, u_j)).
  std::vector<Eigen::VectorXd> candidates(static_cast<std::size_t>(M));
  std::vector<Eigen::VectorXd> successors(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    RngStream draw = candidate_base.substream(static_cast<std::uint64_t>(j));
    candidates[j] = noise.sample(k, draw);
    successors[j] = dyn.step(x, candidates[j]);
  }

  // Flattened (candidate, inner sample) grid. Inner sample i uses the same
  // stream for every candidate: common random numbers.
  const std::size_t total = static_cast<std::size_t>(M) * S_inner;
  std::vector<double> log_weights(total);
  parallel_for(total, workers, [&](std::size_t t) {
    thread_local detail::RolloutScratch scratch;
    const std::size_t j = t / static_cast<std::size_t>(S_inner);
    const std::size_t i = t % static_cast<std::size_t>(S_inner);
    if (!successors[j].allFinite()) {
      log_weights[t] = kNegInf;
      return;
    }
    RngStream path_rng = inner_base.substream(static_cast<std::uint64_t>(i));
    log_weights[t] = detail::log_path_weight(dyn, noise, costs, k + 1,
                                             successors[j], path_rng, scratch);
  });

  Eigen::VectorXd log_z(M);
  for (int j = 0; j < M; ++j) {
    const std::span<const double> slice(
        log_weights.data() + static_cast<std::size_t>(j) * S_inner,
        static_cast<std::size_t>(S_inner));
    log_z[j] = log_mean_exp(slice);
  }

  const double lse = log_sum_exp(std::span<const double>(log_z.data(), log_z.size()));
  if (lse == kNegInf) {
    throw EstimationFailed("sample_optimal_control_snis: all candidate weights vanished",
                           k);
  }

  PolicySample sample;
  sample.candidate_count = M;
  sample.normalized_weights.resize(M);
  for (int j = 0; j < M; ++j) {
    sample.normalized_weights[j] = std::exp(log_z[j] - lse);
  }

  double sum_sq = 0.0;
  long double cum = 0.0L;
  RngStream select = rng.substream(2);
  const double u = select.uniform();
  int chosen = M - 1;
  bool found = false;
  for (int j = 0; j < M; ++j) {
    const double w = sample.normalized_weights[j];
    sum_sq += w * w;
    cum += static_cast<long double>(w);
    if (!found && static_cast<double>(cum) > u) {
      chosen = j;
      found = true;
    }
  }
  sample.effective_sample_size = 1.0 / sum_sq;
  sample.control = candidates[chosen];
  return sample;
}

}  // namespace klc
