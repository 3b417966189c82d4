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

#include "cslm/biskip.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

#include "cslm/embed.hpp"
#include "cslm/huffman.hpp"
#include "cslm/rng.hpp"
#include "cslm/sampling.hpp"

namespace cslm {
namespace {

void append_window_pairs(std::vector<TrainingPair>& out,
                         const std::vector<Token>& center_side,
                         const std::vector<Token>& context_side,
                         int center_pos, int around, int window,
                         double weight) {
  const int n = static_cast<int>(context_side.size());
  for (int c = std::max(0, around - window);
       c <= std::min(n - 1, around + window); ++c) {
    if (c == around) continue;
    out.push_back({center_side[center_pos].surface, context_side[c].surface,
                   weight});
  }
}

}  // namespace

std::vector<TrainingPair> expand_training_pairs(const AlignedSentencePair& p,
                                                int window,
                                                double cross_weight) {
  std::vector<TrainingPair> out;
  const auto& src = p.src.tokens;
  const auto& tgt = p.tgt.tokens;
  // Monolingual objectives in both languages.
  for (int i = 0; i < static_cast<int>(src.size()); ++i)
    append_window_pairs(out, src, src, i, i, window, 1.0);
  for (int j = 0; j < static_cast<int>(tgt.size()); ++j)
    append_window_pairs(out, tgt, tgt, j, j, window, 1.0);
  // Cross-lingual objectives: each linked word predicts the other side's
  // context around the linked position.
  for (const auto& [i, j] : p.links) {
    append_window_pairs(out, tgt, src, j, i, window, cross_weight);
    append_window_pairs(out, src, tgt, i, j, window, cross_weight);
  }
  return out;
}

EmbeddingMatrix train_biskip(const std::vector<AlignedSentencePair>& parallel,
                             const Corpus& self_text, const BiskipConfig& cfg) {
  // The self-text sentences enter as fake-aligned pairs where every word is
  // aligned with itself.
  std::vector<AlignedSentencePair> pairs = parallel;
  for (const auto& s : self_text.sentences)
    pairs.push_back(fake_self_alignment(s));
  if (pairs.empty())
    throw std::runtime_error("biskip needs at least one sentence pair");

  Corpus all;
  all.origin = "biskip-training";
  for (const auto& p : pairs) {
    all.sentences.push_back(p.src);
    all.sentences.push_back(p.tgt);
  }

  TrainConfig mono_cfg;
  mono_cfg.dim = cfg.dim;
  mono_cfg.window = cfg.window;
  mono_cfg.negatives = cfg.negatives;
  mono_cfg.epochs = cfg.epochs;
  mono_cfg.base_lr = cfg.base_lr;
  mono_cfg.min_count = 1;
  mono_cfg.seed = cfg.seed;
  mono_cfg.model = EmbedModel::kSkipgramNs;

  Vocabulary vocab = build_vocabulary(all, /*min_count=*/1);
  EmbeddingMatrix emb = init_embeddings(vocab, cfg.dim, cfg.seed);
  NoiseSampler sampler(vocab);

  struct PairIds {
    std::vector<int> src;
    std::vector<int> tgt;
    // links grouped per position for the hooks
    std::vector<std::vector<int>> by_src;  // src position -> tgt positions
    std::vector<std::vector<int>> by_tgt;  // tgt position -> src positions
  };
  std::vector<PairIds> data;
  data.reserve(pairs.size());
  std::int64_t total_tokens = 0;
  for (const auto& p : pairs) {
    PairIds d;
    for (const auto& t : p.src.tokens) d.src.push_back(*vocab.lookup(t.surface));
    for (const auto& t : p.tgt.tokens) d.tgt.push_back(*vocab.lookup(t.surface));
    d.by_src.resize(d.src.size());
    d.by_tgt.resize(d.tgt.size());
    for (const auto& [i, j] : p.links) {
      if (i < 0 || j < 0 || i >= static_cast<int>(d.src.size()) ||
          j >= static_cast<int>(d.tgt.size()))
        throw std::runtime_error("alignment link out of range");
      d.by_src[i].push_back(j);
      d.by_tgt[j].push_back(i);
    }
    total_tokens += d.src.size() + d.tgt.size();
    data.push_back(std::move(d));
  }

  detail::SgnsEngine engine(emb, &sampler, nullptr, mono_cfg,
                            total_tokens * cfg.epochs,
                            SplitMix64(cfg.seed).split(1));
  const bool cross = cfg.cross_weight != 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    engine.epoch_loss = 0.0;
    engine.steps = 0;
    for (const auto& d : data) {
      std::span<const int> src_ids{d.src.data(), d.src.size()};
      std::span<const int> tgt_ids{d.tgt.data(), d.tgt.size()};
      if (cross) {
        detail::SgnsEngine::PositionHook src_hook = [&](int pos, double lr) {
          for (int j : d.by_src[pos])
            engine.weighted_context_steps(d.tgt[j], src_ids, pos,
                                          cfg.cross_weight, lr);
        };
        detail::SgnsEngine::PositionHook tgt_hook = [&](int pos, double lr) {
          for (int i : d.by_tgt[pos])
            engine.weighted_context_steps(d.src[i], tgt_ids, pos,
                                          cfg.cross_weight, lr);
        };
        engine.train_sentence(src_ids, &src_hook);
        engine.train_sentence(tgt_ids, &tgt_hook);
      } else {
        engine.train_sentence(src_ids, nullptr);
        engine.train_sentence(tgt_ids, nullptr);
      }
    }
    if (cfg.verbose && engine.steps > 0) {
      std::cerr << "biskip epoch " << epoch + 1 << "/" << cfg.epochs
                << " mean step loss " << engine.epoch_loss / engine.steps
                << "\n";
    }
  }
  if (!cfg.keep_outputs) emb.finalize();
  return emb;
}

}  // namespace cslm
