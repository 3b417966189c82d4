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

#ifndef CSLM_BISKIP_HPP_
#define CSLM_BISKIP_HPP_

#include <cstdint>
#include <tuple>
#include <vector>

#include "cslm/corpus.hpp"
#include "cslm/embedding.hpp"

namespace cslm {

struct BiskipConfig {
  int dim = 200;
  int window = 10;
  int negatives = 30;
  double cross_weight = 4.0;
  int epochs = 5;
  double base_lr = 0.025;
  std::uint64_t seed = 1;
  bool keep_outputs = false;
  bool verbose = false;
};

struct TrainingPair {
  std::string center;
  std::string context;
  double weight;
};

// Enumerates the four sub-objectives of one aligned pair with a fixed
// window: both monolingual skip-gram directions at weight 1, and for every
// link (i, j) the cross-lingual predictions (tgt[j] -> context of src at i,
// src[i] -> context of tgt at j) at weight cross_weight. The training loop
// itself draws dynamic windows; this fixed-window form is the testable
// ground truth for what a pair contributes.
std::vector<TrainingPair> expand_training_pairs(const AlignedSentencePair& p,
                                                int window,
                                                double cross_weight);

// Joint bilingual skip-gram over word-aligned parallel pairs plus
// self-aligned text sentences, on a single shared surface-form vocabulary.
// With cross_weight == 0 and no links this reduces bitwise to plain
// skip-gram negative-sampling training on the concatenated sentences.
EmbeddingMatrix train_biskip(const std::vector<AlignedSentencePair>& parallel,
                             const Corpus& self_text, const BiskipConfig& cfg);

}  // namespace cslm

#endif  // CSLM_BISKIP_HPP_
