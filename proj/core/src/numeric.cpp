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

#include "klc/numeric.hpp"

#include <cmath>
#include <limits>

namespace klc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_sum_exp(std::span<const double> values) {
  double max_v = kNegInf;
  for (double v : values) {
    if (v > max_v) max_v = v;
  }
  if (!std::isfinite(max_v)) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - max_v);
  return max_v + std::log(acc);
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double lse = log_sum_exp(values);
  return std::isfinite(lse)
             ? lse - std::log(static_cast<double>(values.size()))
             : lse;
}

LogWeightStats log_weight_statistics(std::span<const double> values) {
  LogWeightStats out{kNegInf, 0.0, 0.0, 0};
  if (values.empty()) return out;

  double max_v = kNegInf;
  double min_v = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (v > max_v) max_v = v;
    if (v < min_v) min_v = v;
  }
  out.spread = max_v - min_v;
  if (!std::isfinite(max_v)) {
    out.spread = 0.0;
    return out;
  }

  const std::size_t n = values.size();
  // a_i = exp(v_i - max) in [0, 1]; -inf maps to exactly 0.
  double sum = 0.0;
  for (double v : values) {
    const double a = std::exp(v - max_v);
    sum += a;
    if (a > 0.0) ++out.finite_count;
  }
  const double mean_a = sum / static_cast<double>(n);
  // Shares log_mean_exp's exact arithmetic so fused estimators that call it
  // directly reproduce this value bit for bit.
  out.log_mean = log_mean_exp(values);

  if (n > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double d = std::exp(v - max_v) - mean_a;
      ss += d * d;
    }
    const double var_a = ss / static_cast<double>(n - 1);
    out.std_error =
        std::sqrt(var_a / static_cast<double>(n)) / mean_a;
  }
  return out;
}

}  // namespace klc
