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

#ifndef KLC_GAUSSIAN_HPP_
#define KLC_GAUSSIAN_HPP_

#include <Eigen/Dense>

namespace klc {

/// KL divergence KL(N(mean1, cov1) || N(mean0, cov0)) in closed form.
/// Both covariances must be symmetric positive definite (domain error
/// otherwise). Nonnegative, zero exactly when the parameters coincide.
double kl_gaussians(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                    const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0);

}  // namespace klc

#endif  // KLC_GAUSSIAN_HPP_
