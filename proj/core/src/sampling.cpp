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

#include "cslm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cslm {

NoiseSampler::NoiseSampler(const Vocabulary& vocab, double exponent) {
  const int n = vocab.size();
  if (n < 1) throw std::runtime_error("noise table needs a vocabulary");
  probs_.resize(n);
  double total = 0.0;
  for (int id = 0; id < n; ++id) {
    const double w =
        vocab.count(id) > 0 ? std::pow(static_cast<double>(vocab.count(id)),
                                       exponent)
                            : 0.0;
    probs_[id] = w;
    total += w;
  }
  if (total <= 0.0)
    throw std::runtime_error("noise table: all counts are zero");
  cumulative_.resize(n);
  double acc = 0.0;
  for (int id = 0; id < n; ++id) {
    probs_[id] /= total;
    if (probs_[id] > 0.0) ++support_;
    acc += probs_[id];
    cumulative_[id] = acc;
  }
  cumulative_.back() = 1.0;
}

double NoiseSampler::probability(int id) const { return probs_[id]; }

int NoiseSampler::sample(SplitMix64& rng) const {
  const double u = rng.next_double();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<int>(it - cumulative_.begin());
}

int NoiseSampler::sample_excluding(int exclude_id, SplitMix64& rng) const {
  const bool exclude_has_mass =
      exclude_id >= 0 && static_cast<std::size_t>(exclude_id) < probs_.size() &&
      probs_[exclude_id] > 0.0;
  if (support_ == 1 && exclude_has_mass) {
    throw std::runtime_error(
        "cannot sample negatives: distribution has a single word");
  }
  int id = sample(rng);
  while (id == exclude_id) id = sample(rng);
  return id;
}

std::vector<int> sample_negatives(const NoiseSampler& sampler, int k,
                                  int exclude_id, SplitMix64& rng) {
  if (k < 1) throw std::runtime_error("negative sample count must be >= 1");
  std::vector<int> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i)
    out.push_back(sampler.sample_excluding(exclude_id, rng));
  return out;
}

NoiseSampler build_noise_table(const Vocabulary& vocab) {
  return NoiseSampler(vocab);
}

}  // namespace cslm
