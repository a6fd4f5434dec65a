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

#ifndef KLC_PARALLEL_HPP_
#define KLC_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace klc {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index must be
/// independent of the others (results written to per-index slots); reductions
/// happen after the call, in index order, so worker count never changes the
/// outcome. workers <= 1 runs inline. Exceptions from tasks are rethrown on
/// the calling thread.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace klc

#endif  // KLC_PARALLEL_HPP_
