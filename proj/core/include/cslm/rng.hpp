// Copyright 2026 The CSLM Authors
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

#ifndef CSLM_RNG_HPP_
#define CSLM_RNG_HPP_

#include <cstdint>

namespace cslm {

// Splittable 64-bit generator (splitmix64 core). All trainers draw from this
// so serial and sharded runs can share one seeding scheme: shard i uses
// split(i) of the run seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  // Uniform integer in [0, n). Modulo bias is < n/2^64, irrelevant here;
  // determinism across platforms is what matters.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  // Derives an independent stream. Child streams of distinct ids never
  // collide with the parent for any realistic draw count.
  SplitMix64 split(std::uint64_t stream_id) const {
    return SplitMix64(mix(state_ ^ mix(stream_id + 0x632BE59BD9B4E019ULL)));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace cslm

#endif  // CSLM_RNG_HPP_
