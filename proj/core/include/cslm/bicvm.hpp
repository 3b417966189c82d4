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

#ifndef CSLM_BICVM_HPP_
#define CSLM_BICVM_HPP_

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "cslm/corpus.hpp"
#include "cslm/embedding.hpp"

namespace cslm {

enum class Composition { kAdditive, kBigram };

struct BicvmConfig {
  int dim = 200;
  double margin = 0.0;  // 0 means "use the dimension", the published default
  int noise_count = 10;
  int batch_size = 50;
  double l2_lambda = 1.0;
  double step_size = 0.05;
  int epochs = 20;
  Composition composition = Composition::kAdditive;
  std::uint64_t seed = 1;
  bool verbose = false;

  double resolved_margin() const { return margin > 0.0 ? margin : dim; }
};

// Additive: elementwise sum of the word vectors. Bigram: sum of
// tanh(x_{i-1} + x_i) with a zero vector padded before the first word.
std::vector<double> compose_sentence(
    const std::vector<std::span<const double>>& vectors, Composition comp);

// Noise-contrastive hinge loss: sum over noise sentences of
// max(0, m + E(a,b) - E(a,n)) with E the squared Euclidean distance.
double bicvm_loss(std::span<const double> a, std::span<const double> b,
                  const std::vector<std::vector<double>>& noise, double margin);

// Two embedding tables, one per side of the aligned pairs.
struct BicvmTables {
  EmbeddingMatrix side_a;
  EmbeddingMatrix side_b;
};

using SparseGrad = std::unordered_map<int, std::vector<double>>;

// Loss and word-vector gradients of one pair against its noise sentences,
// everything evaluated at the current tables (no mutation). Sentences are
// id sequences; noise sentences index the B-side table.
double bicvm_pair_gradient(const BicvmTables& tables,
                           std::span<const int> sent_a,
                           std::span<const int> sent_b,
                           const std::vector<std::vector<int>>& noise_b,
                           double margin, Composition comp, SparseGrad& grad_a,
                           SparseGrad& grad_b);

// Trains on the aligned pairs (links ignored) plus the text corpus, where
// each text sentence acts as its own equivalent sentence. Minibatch AdaGrad
// on the hinge loss with L2 on the parameters touched per batch.
BicvmTables train_bicvm(const std::vector<AlignedSentencePair>& pairs,
                        const Corpus& self_text, const BicvmConfig& cfg);

// Collapses the two tables into one bilingual space: Arabic-tagged words
// take their side-A row, English-tagged words side-B, Other-tagged words
// present in both take the elementwise mean.
EmbeddingMatrix finalize_bicvm(const BicvmTables& tables);

}  // namespace cslm

#endif  // CSLM_BICVM_HPP_
