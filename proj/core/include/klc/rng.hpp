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

#ifndef KLC_RNG_HPP_
#define KLC_RNG_HPP_

#include <cstdint>

namespace klc {

/// Counter-based random stream: the pair (master seed, stream index) fully
/// determines the drawn sequence, and distinct indices give statistically
/// independent substreams. Monte-Carlo code derives one substream per sample
/// index, so results do not depend on scheduling or worker count.
///
/// The generator is SplitMix64 keyed by a mix of seed and index chain.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_index = 0);

  /// Independent child stream. Chaining substream calls is allowed; each
  /// level mixes the index into the key.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1).
  double uniform();

  /// Uniform draw in (0, 1].
  double uniform_open();

  /// Standard normal draw (Box-Muller; pairs are cached).
  double normal();

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::uint64_t key);

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace klc

#endif  // KLC_RNG_HPP_
