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

#include "cslm/bicvm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {
namespace {

std::vector<std::span<const double>> gather_rows(const EmbeddingMatrix& emb,
                                                 std::span<const int> ids) {
  std::vector<std::span<const double>> rows;
  rows.reserve(ids.size());
  for (int id : ids) rows.push_back(emb.input_row(id));
  return rows;
}

double squared_distance(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return s;
}

// Distributes the gradient at a composed representation back onto the word
// vectors of the sentence.
void backprop_composition(const std::vector<std::span<const double>>& words,
                          std::span<const double> grad, Composition comp,
                          std::span<const int> ids, SparseGrad& out) {
  const std::size_t dim = grad.size();
  const auto row_grad = [&](int id) -> std::vector<double>& {
    auto& g = out[id];
    if (g.empty()) g.assign(dim, 0.0);
    return g;
  };
  if (comp == Composition::kAdditive) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto& g = row_grad(ids[i]);
      for (std::size_t d = 0; d < dim; ++d) g[d] += grad[d];
    }
    return;
  }
  // Bigram: s = sum_i tanh(x_{i-1} + x_i), x_0 = 0. Word j feeds terms j
  // and j+1.
  const std::size_t n = words.size();
  std::vector<std::vector<double>> terms(n, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double prev = i == 0 ? 0.0 : words[i - 1][d];
      terms[i][d] = std::tanh(prev + words[i][d]);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto& g = row_grad(ids[j]);
    for (std::size_t d = 0; d < dim; ++d) {
      double coeff = 1.0 - terms[j][d] * terms[j][d];
      if (j + 1 < n) coeff += 1.0 - terms[j + 1][d] * terms[j + 1][d];
      g[d] += coeff * grad[d];
    }
  }
}

}  // namespace

std::vector<double> compose_sentence(
    const std::vector<std::span<const double>>& vectors, Composition comp) {
  if (vectors.empty())
    throw std::runtime_error("cannot compose an empty sentence");
  const std::size_t dim = vectors[0].size();
  std::vector<double> out(dim, 0.0);
  if (comp == Composition::kAdditive) {
    for (const auto& v : vectors)
      for (std::size_t d = 0; d < dim; ++d) out[d] += v[d];
    return out;
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double prev = i == 0 ? 0.0 : vectors[i - 1][d];
      out[d] += std::tanh(prev + vectors[i][d]);
    }
  }
  return out;
}

double bicvm_loss(std::span<const double> a, std::span<const double> b,
                  const std::vector<std::vector<double>>& noise,
                  double margin) {
  const double e_ab = squared_distance(a, b);
  double loss = 0.0;
  for (const auto& n : noise) {
    const double term = margin + e_ab - squared_distance(a, {n.data(), n.size()});
    if (term > 0.0) loss += term;
  }
  return loss;
}

double bicvm_pair_gradient(const BicvmTables& tables,
                           std::span<const int> sent_a,
                           std::span<const int> sent_b,
                           const std::vector<std::vector<int>>& noise_b,
                           double margin, Composition comp, SparseGrad& grad_a,
                           SparseGrad& grad_b) {
  const int dim = tables.side_a.dim();
  // every parameter referenced by the pair or its noise counts as touched,
  // so the per-batch L2 reaches it even when the hinge is satisfied
  const auto touch = [dim](SparseGrad& g, std::span<const int> ids) {
    for (int id : ids) {
      auto& row = g[id];
      if (row.empty()) row.assign(dim, 0.0);
    }
  };
  touch(grad_a, sent_a);
  touch(grad_b, sent_b);
  for (const auto& n : noise_b) touch(grad_b, {n.data(), n.size()});

  auto words_a = gather_rows(tables.side_a, sent_a);
  auto words_b = gather_rows(tables.side_b, sent_b);
  std::vector<double> a = compose_sentence(words_a, comp);
  std::vector<double> b = compose_sentence(words_b, comp);

  const double e_ab = squared_distance({a.data(), a.size()},
                                       {b.data(), b.size()});
  double loss = 0.0;
  int active = 0;
  std::vector<double> da(dim, 0.0), db(dim, 0.0);
  for (const auto& noise_ids : noise_b) {
    auto words_n = gather_rows(tables.side_b,
                               {noise_ids.data(), noise_ids.size()});
    std::vector<double> n = compose_sentence(words_n, comp);
    const double e_an = squared_distance({a.data(), a.size()},
                                         {n.data(), n.size()});
    const double term = margin + e_ab - e_an;
    if (term <= 0.0) continue;
    loss += term;
    ++active;
    std::vector<double> dn(dim, 0.0);
    for (int d = 0; d < dim; ++d) {
      da[d] += 2.0 * (n[d] - b[d]);
      dn[d] = 2.0 * (a[d] - n[d]);
    }
    backprop_composition(words_n, {dn.data(), dn.size()}, comp,
                         {noise_ids.data(), noise_ids.size()}, grad_b);
  }
  if (active > 0) {
    for (int d = 0; d < dim; ++d) db[d] = 2.0 * active * (b[d] - a[d]);
    backprop_composition(words_a, {da.data(), da.size()}, comp, sent_a, grad_a);
    backprop_composition(words_b, {db.data(), db.size()}, comp, sent_b, grad_b);
  }
  return loss;
}

BicvmTables train_bicvm(const std::vector<AlignedSentencePair>& pairs,
                        const Corpus& self_text, const BicvmConfig& cfg) {
  // Pair pool: aligned pairs first, then every text sentence paired with
  // itself.
  Corpus side_a_corpus, side_b_corpus;
  side_a_corpus.origin = "bicvm-side-a";
  side_b_corpus.origin = "bicvm-side-b";
  for (const auto& p : pairs) {
    side_a_corpus.sentences.push_back(p.src);
    side_b_corpus.sentences.push_back(p.tgt);
  }
  for (const auto& s : self_text.sentences) {
    side_a_corpus.sentences.push_back(s);
    side_b_corpus.sentences.push_back(s);
  }
  const std::size_t n_pairs = side_a_corpus.sentences.size();
  if (n_pairs == 0)
    throw std::runtime_error("bicvm needs at least one sentence pair");

  Vocabulary vocab_a = build_vocabulary(side_a_corpus, 1);
  Vocabulary vocab_b = build_vocabulary(side_b_corpus, 1);
  // Distance-hinge training needs O(1) coordinates from the start: with the
  // margin tied to the dimension, vectors initialized near zero make every
  // composed representation collapse to the same point.
  SplitMix64 seeder(cfg.seed);
  BicvmTables tables{EmbeddingMatrix(vocab_a, cfg.dim, /*with_output=*/false),
                     EmbeddingMatrix(vocab_b, cfg.dim, /*with_output=*/false)};
  {
    SplitMix64 rng_a(seeder.next()), rng_b(seeder.next());
    for (double& x : tables.side_a.input_data()) x = rng_a.uniform(-0.5, 0.5);
    for (double& x : tables.side_b.input_data()) x = rng_b.uniform(-0.5, 0.5);
  }

  std::vector<std::vector<int>> ids_a, ids_b;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    std::vector<int> a, b;
    for (const auto& t : side_a_corpus.sentences[i].tokens)
      a.push_back(*vocab_a.lookup(t.surface));
    for (const auto& t : side_b_corpus.sentences[i].tokens)
      b.push_back(*vocab_b.lookup(t.surface));
    ids_a.push_back(std::move(a));
    ids_b.push_back(std::move(b));
  }

  const double margin = cfg.resolved_margin();
  AdaGradState state_a(tables.side_a.input_data().size(), cfg.step_size);
  AdaGradState state_b(tables.side_b.input_data().size(), cfg.step_size);
  SplitMix64 rng = SplitMix64(cfg.seed).split(1);

  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);

  const auto apply_side = [&](EmbeddingMatrix& emb, AdaGradState& state,
                              SparseGrad& grads, const char* block) {
    const int dim = emb.dim();
    for (auto& [id, g] : grads) {
      auto row = emb.input_row(id);
      if (cfg.l2_lambda > 0.0)
        for (int d = 0; d < dim; ++d) g[d] += cfg.l2_lambda * row[d];
      adagrad_update_row(row, {g.data(), g.size()}, state,
                         static_cast<std::size_t>(id) * dim, block);
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fresh pair order and fresh noise every epoch.
    for (std::size_t i = n_pairs; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_pairs; start += cfg.batch_size) {
      const std::size_t stop = std::min(n_pairs, start + cfg.batch_size);
      SparseGrad grad_a, grad_b;
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t p = order[k];
        std::vector<std::vector<int>> noise;
        if (n_pairs > 1) {
          for (int j = 0; j < cfg.noise_count; ++j) {
            std::size_t pick = rng.next_below(n_pairs - 1);
            if (pick >= p) ++pick;
            noise.push_back(ids_b[pick]);
          }
        }
        epoch_loss += bicvm_pair_gradient(
            tables, {ids_a[p].data(), ids_a[p].size()},
            {ids_b[p].data(), ids_b[p].size()}, noise, margin, cfg.composition,
            grad_a, grad_b);
      }
      apply_side(tables.side_a, state_a, grad_a, "bicvm side A");
      apply_side(tables.side_b, state_b, grad_b, "bicvm side B");
    }
    if (cfg.verbose)
      std::cerr << "bicvm epoch " << epoch + 1 << "/" << cfg.epochs
                << " hinge loss " << epoch_loss << "\n";
  }
  return tables;
}

EmbeddingMatrix finalize_bicvm(const BicvmTables& tables) {
  const int dim = tables.side_a.dim();
  const Vocabulary& va = tables.side_a.vocab();
  const Vocabulary& vb = tables.side_b.vocab();

  std::unordered_map<std::string, std::int64_t> pooled;
  for (int id = 0; id < va.size(); ++id)
    if (!va.is_reserved(id)) pooled[va.word(id)] += va.count(id);
  for (int id = 0; id < vb.size(); ++id)
    if (!vb.is_reserved(id)) pooled[vb.word(id)] += vb.count(id);
  std::vector<std::pair<std::string, std::int64_t>> merged(pooled.begin(),
                                                           pooled.end());
  std::sort(merged.begin(), merged.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  Vocabulary vocab;
  for (auto& [w, c] : merged) vocab.add(w, c);
  vocab.add(Vocabulary::kSentenceStart, 0);
  vocab.add(Vocabulary::kSentenceEnd, 0);
  vocab.add(Vocabulary::kUnknown, 0);

  const auto lookup_regular = [](const Vocabulary& v, const std::string& w) {
    auto id = v.lookup(w);
    if (!id || v.is_reserved(*id)) return -1;
    return *id;
  };
  EmbeddingMatrix out(vocab, dim, /*with_output=*/false);
  for (int id = 0; id < vocab.size(); ++id) {
    if (vocab.is_reserved(id)) continue;
    const std::string& w = vocab.word(id);
    const int ia = lookup_regular(va, w);
    const int ib = lookup_regular(vb, w);
    auto dst = out.input_row(id);
    const LanguageTag tag = tag_language(w);
    if (ia >= 0 && ib >= 0) {
      if (tag == LanguageTag::kArabic) {
        std::copy_n(tables.side_a.input_row(ia).begin(), dim, dst.begin());
      } else if (tag == LanguageTag::kEnglish) {
        std::copy_n(tables.side_b.input_row(ib).begin(), dim, dst.begin());
      } else {
        auto ra = tables.side_a.input_row(ia);
        auto rb = tables.side_b.input_row(ib);
        for (int d = 0; d < dim; ++d) dst[d] = 0.5 * (ra[d] + rb[d]);
      }
    } else if (ia >= 0) {
      std::copy_n(tables.side_a.input_row(ia).begin(), dim, dst.begin());
    } else if (ib >= 0) {
      std::copy_n(tables.side_b.input_row(ib).begin(), dim, dst.begin());
    }
  }
  return out;
}

}  // namespace cslm
