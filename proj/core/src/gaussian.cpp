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

#include "klc/gaussian.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace klc {
namespace {

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& cov,
                                       const char* name) {
  if (cov.rows() != cov.cols() || !cov.isApprox(cov.transpose(), 1e-10)) {
    throw std::domain_error(std::string("kl_gaussians: ") + name +
                            " is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error(std::string("kl_gaussians: ") + name +
                            " is not positive definite");
  }
  return llt;
}

double log_det_from_factor(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

double kl_gaussians(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                    const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0) {
  const auto m = mean1.size();
  if (mean0.size() != m || cov1.rows() != m || cov0.rows() != m) {
    throw std::domain_error("kl_gaussians: dimension mismatch");
  }
  const auto llt1 = spd_factor(cov1, "cov1");
  const auto llt0 = spd_factor(cov0, "cov0");

  const double trace_term = llt0.solve(cov1).trace();
  const Eigen::VectorXd diff = mean1 - mean0;
  const double maha = diff.dot(llt0.solve(diff));
  const double log_det_ratio = log_det_from_factor(llt0) - log_det_from_factor(llt1);

  const double kl =
      0.5 * (trace_term + maha - static_cast<double>(m) + log_det_ratio);
  // Clamp the tiny negative values float arithmetic can produce at equality.
  return kl < 0.0 && kl > -1e-12 ? 0.0 : kl;
}

}  // namespace klc
