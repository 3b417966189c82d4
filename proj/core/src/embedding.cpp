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

#include "cslm/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {

EmbeddingMatrix::EmbeddingMatrix(Vocabulary vocab, int dim, bool with_output)
    : vocab_(std::move(vocab)), dim_(dim) {
  if (dim < 1) throw std::runtime_error("embedding dim must be >= 1");
  const std::size_t n = static_cast<std::size_t>(vocab_.size()) * dim_;
  input_.assign(n, 0.0);
  if (with_output) output_.assign(n, 0.0);
}

EmbeddingMatrix init_embeddings(const Vocabulary& vocab, int dim,
                                std::uint64_t seed) {
  EmbeddingMatrix emb(vocab, dim, /*with_output=*/true);
  SplitMix64 rng(seed);
  const double half = 0.5 / dim;
  for (double& v : emb.input_data()) v = rng.uniform(-half, half);
  return emb;
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  const double uu = dot(u, u), vv = dot(v, v);
  if (uu == 0.0 || vv == 0.0)
    throw std::runtime_error("cosine of zero vector is undefined");
  return dot(u, v) / (std::sqrt(uu) * std::sqrt(vv));
}

void save_embeddings_text(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embeddings " + path);
  const Vocabulary& vocab = emb.vocab();
  int written = 0;
  for (int id = 0; id < vocab.size(); ++id)
    if (!vocab.is_reserved(id) || vocab.count(id) > 0) ++written;
  out << written << ' ' << emb.dim() << '\n';
  char buf[64];
  for (int id = 0; id < vocab.size(); ++id) {
    if (vocab.is_reserved(id) && vocab.count(id) == 0) continue;
    out << vocab.word(id);
    auto row = emb.input_row(id);
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), " %.6g", v);
      out << buf;
    }
    out << '\n';
  }
}

EmbeddingMatrix load_embeddings_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embeddings " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error(path + ": empty embeddings file");
  std::istringstream hs(header);
  long long n = 0;
  int dim = 0;
  if (!(hs >> n >> dim) || n < 1 || dim < 1)
    throw std::runtime_error(path + ": bad header '" + header + "'");

  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    std::vector<double> row(dim);
    for (int k = 0; k < dim; ++k) {
      if (!(ls >> row[k]))
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected " + std::to_string(dim) +
                                 " values");
    }
    words.push_back(word);
    rows.push_back(std::move(row));
  }
  if (static_cast<long long>(words.size()) != n)
    throw std::runtime_error(path + ": header claims " + std::to_string(n) +
                             " words, found " + std::to_string(words.size()));

  Vocabulary vocab;
  for (const auto& w : words) vocab.add(w, 1);
  vocab.add(Vocabulary::kSentenceStart, 0);
  vocab.add(Vocabulary::kSentenceEnd, 0);
  vocab.add(Vocabulary::kUnknown, 0);
  EmbeddingMatrix emb(vocab, dim, /*with_output=*/false);
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto dst = emb.input_row(static_cast<int>(i));
    for (int k = 0; k < dim; ++k) dst[k] = rows[i][k];
  }
  return emb;
}

namespace {

void adagrad_step(std::span<double> params, std::span<const double> grads,
                  AdaGradState& state, std::size_t offset,
                  const std::string& block) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g))
      throw std::runtime_error("non-finite gradient in block '" + block + "'");
    double& acc = state.accumulators[offset + i];
    acc += g * g;
    params[i] -= state.base_lr * g / (std::sqrt(acc) + state.epsilon);
  }
}

}  // namespace

void adagrad_update(std::span<double> params, std::span<const double> grads,
                    AdaGradState& state, const std::string& block) {
  if (params.size() != grads.size() ||
      params.size() != state.accumulators.size())
    throw std::runtime_error("adagrad shape mismatch in block '" + block + "'");
  adagrad_step(params, grads, state, 0, block);
}

void adagrad_update_row(std::span<double> params, std::span<const double> grads,
                        AdaGradState& state, std::size_t row_offset,
                        const std::string& block) {
  if (params.size() != grads.size() ||
      row_offset + params.size() > state.accumulators.size())
    throw std::runtime_error("adagrad shape mismatch in block '" + block + "'");
  adagrad_step(params, grads, state, row_offset, block);
}

}  // namespace cslm
