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

#ifndef KLC_NOISE_HPP_
#define KLC_NOISE_HPP_

#include <Eigen/Dense>
#include <vector>

#include "klc/rng.hpp"

namespace klc {

/// Per-stage law of the exogenous input w_k. Two families are supported:
/// zero-mean Gaussians (stationary or one covariance per stage) and finitely
/// supported distributions given by atoms with log probabilities.
///
/// Invariants checked at construction: Gaussian covariances are symmetric
/// positive definite; discrete probabilities are positive and sum to one
/// within 1e-12; all atoms share one dimension.
class NoiseModel {
 public:
  enum class Kind { kGaussian, kDiscrete };

  /// Stationary zero-mean Gaussian, one covariance for every stage.
  static NoiseModel gaussian(const Eigen::MatrixXd& covariance);

  /// Zero-mean Gaussian with covariance Sigma_k at stage k; the vector
  /// supplies Sigma_0..Sigma_{N-1}.
  static NoiseModel gaussian_schedule(std::vector<Eigen::MatrixXd> covariances);

  /// Finitely supported law: P(w = support[i]) = exp(log_probabilities[i]).
  static NoiseModel discrete(std::vector<Eigen::VectorXd> support,
                             std::vector<double> log_probabilities);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool stationary() const { return kind_ == Kind::kDiscrete || covariances_.size() == 1; }

  /// Gaussian only. Stationary models accept any stage index.
  const Eigen::MatrixXd& covariance(int stage) const;
  /// Lower Cholesky factor of covariance(stage).
  const Eigen::MatrixXd& cholesky_factor(int stage) const;

  /// Discrete only.
  const std::vector<Eigen::VectorXd>& support() const;
  const std::vector<double>& log_probabilities() const;
  int atom_count() const { return static_cast<int>(support_.size()); }

  /// Draws w_k into a caller-owned buffer (resized if needed).
  void sample_into(int stage, RngStream& rng, Eigen::VectorXd& out) const;
  Eigen::VectorXd sample(int stage, RngStream& rng) const;

  /// Discrete only: draws an atom index by inverse CDF from one uniform.
  int sample_index(RngStream& rng) const;

 private:
  NoiseModel() = default;
  int stage_slot(int stage) const;

  Kind kind_ = Kind::kGaussian;
  int dim_ = 0;
  // Gaussian state.
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> cholesky_;
  // Discrete state.
  std::vector<Eigen::VectorXd> support_;
  std::vector<double> log_probabilities_;
  std::vector<double> cumulative_;
};

}  // namespace klc

#endif  // KLC_NOISE_HPP_
