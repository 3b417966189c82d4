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

#ifndef CSLM_EMBED_HPP_
#define CSLM_EMBED_HPP_

#include <cstdint>
#include <functional>
#include <span>

#include "cslm/corpus.hpp"
#include "cslm/embedding.hpp"
#include "cslm/huffman.hpp"
#include "cslm/sampling.hpp"

namespace cslm {

enum class EmbedModel { kCbowNs, kSkipgramHs, kSkipgramNs };

struct TrainConfig {
  int dim = 200;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double base_lr = 0.025;
  int min_count = 1;
  std::uint64_t seed = 1;
  EmbedModel model = EmbedModel::kCbowNs;
  double subsample = 0.0;   // frequent-word subsampling threshold; 0 = off
  bool use_adagrad = false; // adaptive steps instead of the scheduled-lr SGD
  bool keep_outputs = false;
  int threads = 1;          // >1 enables racy sharded mode (non-deterministic)
  bool verbose = false;
};

// Optional per-table AdaGrad accumulators for the step functions; when
// absent the steps apply plain SGD at the given lr.
struct StepOptimizer {
  AdaGradState input;
  AdaGradState output;

  StepOptimizer(const EmbeddingMatrix& emb, double base_lr)
      : input(emb.input_data().size(), base_lr),
        output(emb.output_data().size(), base_lr) {}
};

// One hierarchical-softmax update: walks the context word's Huffman path with
// the center word's input vector. Returns the loss at the pre-update point;
// gradients are applied as a plain SGD step of size lr, or through `opt` when
// given. lr = 0 with no optimizer evaluates the loss without mutating.
double skipgram_hs_step(EmbeddingMatrix& emb, const HuffmanTree& tree,
                        int center_id, int context_id, double lr,
                        StepOptimizer* opt = nullptr);

// One negative-sampling CBOW update: h is the mean of the context input
// vectors, scored against the center's output vector and k sampled negatives.
double cbow_ns_step(EmbeddingMatrix& emb, const NoiseSampler& sampler,
                    std::span<const int> context_ids, int center_id, int k,
                    double lr, SplitMix64& rng, StepOptimizer* opt = nullptr);

// One negative-sampling skip-gram update with all gradients scaled by
// `weight` (the cross-lingual objectives pass weight > 1).
double skipgram_ns_step(EmbeddingMatrix& emb, const NoiseSampler& sampler,
                        int center_id, int context_id, int k, double lr,
                        double weight, SplitMix64& rng,
                        StepOptimizer* opt = nullptr);

// Trains one embedding space over the corpus: per position a dynamic window
// b ~ U[1, window], linear lr decay from base_lr to base_lr/1e4 over the
// scheduled updates. Deterministic per seed when threads == 1.
EmbeddingMatrix train_mono(const Corpus& corpus, const TrainConfig& cfg);

// Joint bilingual training on the concatenation of the four corpora (in
// argument order) with one shared surface-form vocabulary. Needs no lexicon
// and no alignments; the code-switched sentences are the cross-lingual glue.
// Warns on stderr when cs is empty. model must be kCbowNs or kSkipgramHs.
EmbeddingMatrix train_bics(const Corpus& mono_ar, const Corpus& mono_en,
                           const Corpus& cs, const Corpus& extra_text,
                           const TrainConfig& cfg);

namespace detail {

// Shared sentence-level trainer used by train_mono and the bilingual
// skip-gram trainer. The cross-step hook runs after the monolingual steps of
// each center position and must not consume rng when it has nothing to do,
// so that hook-free runs and hooked runs with no links share one rng stream.
class SgnsEngine {
 public:
  SgnsEngine(EmbeddingMatrix& emb, const NoiseSampler* sampler,
             const HuffmanTree* tree, const TrainConfig& cfg,
             std::int64_t scheduled_updates, SplitMix64 rng,
             StepOptimizer* opt = nullptr);

  using PositionHook = std::function<void(int position, double lr)>;

  void train_sentence(std::span<const int> ids, const PositionHook* hook);

  // Skip-gram steps from `center_id` into the dynamic window around
  // `around` within `ids`, every gradient scaled by `weight`.
  double weighted_context_steps(int center_id, std::span<const int> ids,
                                int around, double weight, double lr);

  double scheduled_lr() const;
  SplitMix64& rng() { return rng_; }
  double epoch_loss = 0.0;
  std::int64_t steps = 0;

 private:
  EmbeddingMatrix& emb_;
  const NoiseSampler* sampler_;
  const HuffmanTree* tree_;
  const TrainConfig& cfg_;
  std::int64_t scheduled_updates_;
  std::int64_t processed_ = 0;
  SplitMix64 rng_;
  StepOptimizer* opt_;
};

// Sentence -> ids with OOV tokens dropped.
std::vector<std::vector<int>> corpus_to_ids(const Corpus& corpus,
                                            const Vocabulary& vocab);

Corpus concat_corpora(std::initializer_list<const Corpus*> parts,
                      const std::string& origin);

}  // namespace detail

}  // namespace cslm

#endif  // CSLM_EMBED_HPP_
