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

#ifndef CSLM_LM_HPP_
#define CSLM_LM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cslm/corpus.hpp"
#include "cslm/embedding.hpp"

namespace cslm {

// Embedding layer, one LSTM layer and a softmax output layer. Gate blocks in
// the 4h axis are ordered input, forget, candidate, output.
struct LstmLmParams {
  Vocabulary vocab;
  int dim = 0;
  int hidden = 0;
  Eigen::MatrixXd embedding;    // |V| x d
  Eigen::MatrixXd w_input;      // d x 4h
  Eigen::MatrixXd w_recurrent;  // h x 4h
  Eigen::VectorXd bias;         // 4h, forget block initialized to +1
  Eigen::MatrixXd w_output;     // h x |V|
  Eigen::VectorXd b_output;     // |V|

  int vocab_size() const { return vocab.size(); }
};

struct LmGradients {
  Eigen::MatrixXd embedding, w_input, w_recurrent, w_output;
  Eigen::VectorXd bias, b_output;

  void zero_like(const LstmLmParams& p);
  double squared_norm() const;
  void scale(double s);
};

struct LmConfig {
  int dim = 200;
  int hidden = 300;
  int batch_size = 16;
  double base_lr = 0.1;
  int max_epochs = 50;
  int patience = 3;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  bool verbose = false;
};

struct EvalResult {
  double perplexity = 0.0;
  std::int64_t token_count = 0;  // predicted positions (words + </s>)
  double oov_rate = 0.0;         // fraction of corpus tokens mapped to <unk>
};

struct LmTrainHistory {
  std::vector<double> train_loss;  // mean cross-entropy per epoch
  std::vector<double> dev_ppl;     // dev perplexity after each epoch
  int best_epoch = -1;             // 0-based index into the vectors
};

// Embedding rows uniform in [-0.5/d, 0.5/d) from the same stream
// init_embeddings(seed) uses; the other tensors use split streams so an
// embedding overwrite leaves them bitwise untouched. Non-embedding weights
// are uniform in [-1/sqrt(h), 1/sqrt(h)) and the forget bias is +1.
LstmLmParams init_lm_params(const Vocabulary& vocab, const LmConfig& cfg);

// Copies the rows of vocabulary words found in `pretrained` verbatim over
// the seeded initialization; everything else (including the reserved
// tokens) keeps its seeded rows. Returns the number of copied rows.
int init_embedding_layer(LstmLmParams& params, const EmbeddingMatrix& pretrained);

// Maps tokens through the vocabulary with OOV -> <unk>.
std::vector<int> sentence_to_ids(const Sentence& s, const Vocabulary& vocab);

// Runs the recurrence over one id sequence from zero initial state and
// returns the per-step next-token distributions (|ids| rows of size |V|).
Eigen::MatrixXd lstm_forward(const LstmLmParams& params,
                             const std::vector<int>& ids);

// Mean cross-entropy over the batch's predicted tokens and the full-BPTT
// gradients clipped to `clip_norm` (global norm; 0 disables clipping).
// Each sequence is the raw sentence ids; framing with <s>/</s> happens
// inside. Throws on non-finite loss, naming the batch index.
double lm_loss_and_grads(const LstmLmParams& params,
                         const std::vector<std::vector<int>>& batch,
                         LmGradients& grads, double clip_norm,
                         int batch_index = -1);

struct LmTrainOutput {
  LstmLmParams params;  // best dev-perplexity checkpoint
  LmTrainHistory history;
};

// AdaGrad over shuffled minibatches, early stopping after `patience`
// consecutive epochs without dev improvement, best checkpoint returned.
// `pretrained` optionally initializes the embedding layer, which stays
// trainable either way.
LmTrainOutput train_lm(const Corpus& train, const Corpus& dev,
                       const LmConfig& cfg,
                       const EmbeddingMatrix* pretrained = nullptr);

// Perplexity with OOV tokens mapped to <unk>; predicted positions are
// w1..wn and </s> per sentence (the <s> frame token is input only).
EvalResult perplexity(const LstmLmParams& params, const Corpus& eval_corpus);

// Text checkpoint: version line, config block, vocabulary, then named
// tensors with 9-significant-digit values.
void save_checkpoint(const LstmLmParams& params, const std::string& path);
LstmLmParams load_checkpoint(const std::string& path);

}  // namespace cslm

#endif  // CSLM_LM_HPP_
