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

#include "klc/noise.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace klc {
namespace {

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw std::invalid_argument("NoiseModel: covariance must be square");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-10)) {
    throw std::invalid_argument("NoiseModel: covariance must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("NoiseModel: covariance must be positive definite");
  }
  return llt.matrixL();
}

}  // namespace

NoiseModel NoiseModel::gaussian(const Eigen::MatrixXd& covariance) {
  std::vector<Eigen::MatrixXd> one;
  one.push_back(covariance);
  return gaussian_schedule(std::move(one));
}

NoiseModel NoiseModel::gaussian_schedule(
    std::vector<Eigen::MatrixXd> covariances) {
  if (covariances.empty()) {
    throw std::invalid_argument("NoiseModel: empty covariance schedule");
  }
  NoiseModel model;
  model.kind_ = Kind::kGaussian;
  model.dim_ = static_cast<int>(covariances.front().rows());
  model.cholesky_.reserve(covariances.size());
  for (const auto& sigma : covariances) {
    if (sigma.rows() != model.dim_) {
      throw std::invalid_argument("NoiseModel: covariance dimensions differ");
    }
    model.cholesky_.push_back(checked_cholesky(sigma));
  }
  model.covariances_ = std::move(covariances);
  return model;
}

NoiseModel NoiseModel::discrete(std::vector<Eigen::VectorXd> support,
                                std::vector<double> log_probabilities) {
  if (support.empty() || support.size() != log_probabilities.size()) {
    throw std::invalid_argument(
        "NoiseModel: support and log probabilities must be nonempty and match");
  }
  NoiseModel model;
  model.kind_ = Kind::kDiscrete;
  model.dim_ = static_cast<int>(support.front().size());
  long double total = 0.0L;
  model.cumulative_.reserve(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (static_cast<int>(support[i].size()) != model.dim_) {
      throw std::invalid_argument("NoiseModel: atom dimensions differ");
    }
    if (!std::isfinite(log_probabilities[i])) {
      throw std::invalid_argument("NoiseModel: atom probability must be positive");
    }
    total += std::exp(static_cast<long double>(log_probabilities[i]));
    model.cumulative_.push_back(static_cast<double>(total));
  }
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) {
    throw std::invalid_argument("NoiseModel: probabilities must sum to one");
  }
  model.cumulative_.back() = 1.0;
  model.support_ = std::move(support);
  model.log_probabilities_ = std::move(log_probabilities);
  return model;
}

int NoiseModel::stage_slot(int stage) const {
  if (covariances_.size() == 1) return 0;
  if (stage < 0 || stage >= static_cast<int>(covariances_.size())) {
    throw std::out_of_range("NoiseModel: stage outside covariance schedule");
  }
  return stage;
}

const Eigen::MatrixXd& NoiseModel::covariance(int stage) const {
  if (kind_ != Kind::kGaussian) {
    throw std::logic_error("NoiseModel: covariance requires a Gaussian model");
  }
  return covariances_[stage_slot(stage)];
}

const Eigen::MatrixXd& NoiseModel::cholesky_factor(int stage) const {
  if (kind_ != Kind::kGaussian) {
    throw std::logic_error("NoiseModel: cholesky_factor requires a Gaussian model");
  }
  return cholesky_[stage_slot(stage)];
}

const std::vector<Eigen::VectorXd>& NoiseModel::support() const {
  if (kind_ != Kind::kDiscrete) {
    throw std::logic_error("NoiseModel: support requires a discrete model");
  }
  return support_;
}

const std::vector<double>& NoiseModel::log_probabilities() const {
  if (kind_ != Kind::kDiscrete) {
    throw std::logic_error("NoiseModel: log_probabilities requires a discrete model");
  }
  return log_probabilities_;
}

void NoiseModel::sample_into(int stage, RngStream& rng,
                             Eigen::VectorXd& out) const {
  if (kind_ == Kind::kDiscrete) {
    out = support_[sample_index(rng)];
    return;
  }
  const Eigen::MatrixXd& L = cholesky_[stage_slot(stage)];
  out.resize(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = rng.normal();
  out = L.triangularView<Eigen::Lower>() * out;
}

Eigen::VectorXd NoiseModel::sample(int stage, RngStream& rng) const {
  Eigen::VectorXd w;
  sample_into(stage, rng, w);
  return w;
}

int NoiseModel::sample_index(RngStream& rng) const {
  if (kind_ != Kind::kDiscrete) {
    throw std::logic_error("NoiseModel: sample_index requires a discrete model");
  }
  const double u = rng.uniform();
  // cumulative_ ends at exactly 1.0, so the loop always terminates in range.
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    if (u < cumulative_[i]) return static_cast<int>(i);
  }
  return static_cast<int>(cumulative_.size()) - 1;
}

}  // namespace klc
