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

#ifndef CSLM_HUFFMAN_HPP_
#define CSLM_HUFFMAN_HPP_

#include <cstdint>
#include <vector>

#include "cslm/corpus.hpp"

namespace cslm {

// Per-word Huffman code and root-to-leaf path of inner-node ids, for
// hierarchical softmax. The tree covers the words with positive counts;
// its inner nodes index into the owning embedding matrix's output vectors.
class HuffmanTree {
 public:
  // Greedy min-heap construction over vocabulary counts; ties broken by node
  // id so the tree is deterministic.
  explicit HuffmanTree(const Vocabulary& vocab);

  int vocab_size() const { return static_cast<int>(codes_.size()); }
  // One fewer than the number of coded (positive-count) words.
  int inner_count() const { return inner_count_; }

  // Code bits (0 = left, 1 = right), root first. Empty for words that never
  // occurred.
  const std::vector<std::uint8_t>& code(int word_id) const {
    return codes_[word_id];
  }
  // Inner-node ids along the path, root first; same length as code(word_id).
  const std::vector<int>& path(int word_id) const { return paths_[word_id]; }

 private:
  std::vector<std::vector<std::uint8_t>> codes_;
  std::vector<std::vector<int>> paths_;
  int inner_count_ = 0;
};

HuffmanTree build_huffman(const Vocabulary& vocab);

}  // namespace cslm

#endif  // CSLM_HUFFMAN_HPP_
