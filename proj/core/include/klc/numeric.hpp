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

#ifndef KLC_NUMERIC_HPP_
#define KLC_NUMERIC_HPP_

#include <span>

namespace klc {

/// log(sum_i exp(v_i)) with max subtraction; -inf entries contribute nothing.
/// Returns -inf for an empty span or when every entry is -inf. Summation runs
/// in index order, so the result does not depend on scheduling.
double log_sum_exp(std::span<const double> values);

/// log((1/n) sum_i exp(v_i)).
double log_mean_exp(std::span<const double> values);

/// Summary of exp-weights used by the Monte-Carlo estimators.
struct LogWeightStats {
  double log_mean;     // log of the weight mean
  double spread;       // max - min of the log weights
  double std_error;    // delta-method standard error of log_mean
  int finite_count;    // entries with a representable weight
};

/// Delta-method statistics of log-mean-exp: with a = exp(v - max),
/// se = sd(a) / (sqrt(n) * mean(a)). Throws nothing; callers decide how to
/// treat finite_count == 0 (log_mean is then -inf).
LogWeightStats log_weight_statistics(std::span<const double> values);

}  // namespace klc

#endif  // KLC_NUMERIC_HPP_
