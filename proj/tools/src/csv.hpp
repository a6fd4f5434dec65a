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

#ifndef KLC_TOOLS_CSV_HPP_
#define KLC_TOOLS_CSV_HPP_

#include <cstdio>
#include <string>

namespace klc::tools {

/// 17 significant digits: round-trips any double exactly. CSV outputs must be
/// byte-identical across runs, so all numeric fields go through here.
inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace klc::tools

#endif  // KLC_TOOLS_CSV_HPP_
