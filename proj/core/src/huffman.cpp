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

#include "cslm/huffman.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace cslm {

HuffmanTree::HuffmanTree(const Vocabulary& vocab) {
  const int n = vocab.size();
  // Only observed words get codes; zero-count entries (unused reserved
  // tokens) never occur as hierarchical-softmax targets.
  std::vector<int> coded;
  for (int id = 0; id < n; ++id)
    if (vocab.count(id) > 0) coded.push_back(id);
  const int m = static_cast<int>(coded.size());
  if (m < 2)
    throw std::runtime_error(
        "Huffman tree needs at least 2 words with positive counts");

  // Nodes: leaves are 0..m-1 (indices into `coded`), merged nodes m..2m-2.
  std::vector<std::int64_t> weight(2 * m - 1, 0);
  std::vector<int> parent(2 * m - 1, -1);
  std::vector<std::uint8_t> branch(2 * m - 1, 0);
  for (int i = 0; i < m; ++i) weight[i] = vocab.count(coded[i]);

  using Entry = std::pair<std::int64_t, int>;  // (weight, node id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (int i = 0; i < m; ++i) heap.emplace(weight[i], i);

  int next = m;
  while (heap.size() > 1) {
    auto [w_left, left] = heap.top();
    heap.pop();
    auto [w_right, right] = heap.top();
    heap.pop();
    weight[next] = w_left + w_right;
    parent[left] = next;
    parent[right] = next;
    branch[left] = 0;
    branch[right] = 1;
    heap.emplace(weight[next], next);
    ++next;
  }

  codes_.resize(n);
  paths_.resize(n);
  inner_count_ = m - 1;
  for (int i = 0; i < m; ++i) {
    std::vector<std::uint8_t> code;
    std::vector<int> path;
    for (int node = i; parent[node] != -1; node = parent[node]) {
      code.push_back(branch[node]);
      path.push_back(parent[node] - m);  // inner ids are 0..m-2
    }
    std::reverse(code.begin(), code.end());
    std::reverse(path.begin(), path.end());
    codes_[coded[i]] = std::move(code);
    paths_[coded[i]] = std::move(path);
  }
}

HuffmanTree build_huffman(const Vocabulary& vocab) {
  return HuffmanTree(vocab);
}

}  // namespace cslm
