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

#ifndef CSLM_EMBEDDING_HPP_
#define CSLM_EMBEDDING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cslm/corpus.hpp"

namespace cslm {

// Vocabulary-indexed dense vectors. Trainers keep a second table of output
// (context or inner-node) vectors which finalize() discards; finalized
// matrices expose input vectors only.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(Vocabulary vocab, int dim, bool with_output);

  const Vocabulary& vocab() const { return vocab_; }
  int dim() const { return dim_; }
  int rows() const { return vocab_.size(); }
  bool has_output() const { return !output_.empty(); }

  std::span<double> input_row(int id) {
    return {input_.data() + static_cast<std::size_t>(id) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> input_row(int id) const {
    return {input_.data() + static_cast<std::size_t>(id) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<double> output_row(int id) {
    return {output_.data() + static_cast<std::size_t>(id) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> output_row(int id) const {
    return {output_.data() + static_cast<std::size_t>(id) * dim_,
            static_cast<std::size_t>(dim_)};
  }

  std::vector<double>& input_data() { return input_; }
  const std::vector<double>& input_data() const { return input_; }
  std::vector<double>& output_data() { return output_; }
  const std::vector<double>& output_data() const { return output_; }

  void finalize() { output_.clear(); output_.shrink_to_fit(); }

 private:
  Vocabulary vocab_;
  int dim_ = 0;
  std::vector<double> input_;   // |V| x dim, row-major
  std::vector<double> output_;  // |V| x dim, row-major; empty once finalized
};

// Input vectors i.i.d. uniform in [-0.5/d, 0.5/d), output vectors zero,
// deterministic per seed.
EmbeddingMatrix init_embeddings(const Vocabulary& vocab, int dim,
                                std::uint64_t seed);

double dot(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const double> u, std::span<const double> v);

// Text format: first line `<vocab_size> <dim>`, then one `<word> <v1> ...`
// line per word, 6 significant digits. Reserved tokens that never occurred
// in the training data are not written.
void save_embeddings_text(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_embeddings_text(const std::string& path);

// Elementwise AdaGrad over one parameter block: acc += g^2;
// param -= base_lr * g / (sqrt(acc) + epsilon).
struct AdaGradState {
  std::vector<double> accumulators;
  double base_lr = 0.0;
  double epsilon = 1e-8;

  AdaGradState() = default;
  AdaGradState(std::size_t size, double lr, double eps = 1e-8)
      : accumulators(size, 0.0), base_lr(lr), epsilon(eps) {}
};

// Throws on non-finite gradients, naming `block` in the message.
void adagrad_update(std::span<double> params, std::span<const double> grads,
                    AdaGradState& state, const std::string& block = "params");

// Sparse variant touching one row of a larger block.
void adagrad_update_row(std::span<double> params, std::span<const double> grads,
                        AdaGradState& state, std::size_t row_offset,
                        const std::string& block = "params");

}  // namespace cslm

#endif  // CSLM_EMBEDDING_HPP_
