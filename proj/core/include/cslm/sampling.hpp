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

#ifndef CSLM_SAMPLING_HPP_
#define CSLM_SAMPLING_HPP_

#include <vector>

#include "cslm/corpus.hpp"
#include "cslm/rng.hpp"

namespace cslm {

// Unigram noise distribution with probabilities proportional to count^0.75,
// sampled by binary search over the cumulative table.
class NoiseSampler {
 public:
  explicit NoiseSampler(const Vocabulary& vocab, double exponent = 0.75);

  double probability(int id) const;

  // One draw from the noise distribution.
  int sample(SplitMix64& rng) const;

  // Draws resampled until they differ from exclude_id.
  int sample_excluding(int exclude_id, SplitMix64& rng) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  int support_ = 0;  // ids with positive probability
};

// k i.i.d. draws, each resampled while equal to exclude_id. Throws when the
// distribution has no alternative to exclude_id.
std::vector<int> sample_negatives(const NoiseSampler& sampler, int k,
                                  int exclude_id, SplitMix64& rng);

NoiseSampler build_noise_table(const Vocabulary& vocab);

}  // namespace cslm

#endif  // CSLM_SAMPLING_HPP_
