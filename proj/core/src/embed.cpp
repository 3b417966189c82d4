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

#include "cslm/embed.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cslm {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

struct ScoredTarget {
  int id;
  double label;  // 1 for the observed word, 0 for noise
  double dx;     // dL/d(dot)
};

// Applies one row's gradient as plain SGD of size lr, or through the
// AdaGrad accumulators when an optimizer is present.
void apply_input_row(EmbeddingMatrix& emb, int id,
                     std::span<const double> grad, double lr,
                     StepOptimizer* opt) {
  auto row = emb.input_row(id);
  if (opt) {
    adagrad_update_row(row, grad, opt->input,
                       static_cast<std::size_t>(id) * emb.dim(), "input");
    return;
  }
  for (std::size_t d = 0; d < row.size(); ++d) row[d] -= lr * grad[d];
}

void apply_output_row(EmbeddingMatrix& emb, int id,
                      std::span<const double> grad, double lr,
                      StepOptimizer* opt) {
  auto row = emb.output_row(id);
  if (opt) {
    adagrad_update_row(row, grad, opt->output,
                       static_cast<std::size_t>(id) * emb.dim(), "output");
    return;
  }
  for (std::size_t d = 0; d < row.size(); ++d) row[d] -= lr * grad[d];
}

}  // namespace

double skipgram_hs_step(EmbeddingMatrix& emb, const HuffmanTree& tree,
                        int center_id, int context_id, double lr,
                        StepOptimizer* opt) {
  auto v = emb.input_row(center_id);
  const auto& code = tree.code(context_id);
  const auto& path = tree.path(context_id);
  const int dim = emb.dim();

  std::vector<double> grad_v(dim, 0.0);
  std::vector<double> grad_w(dim);
  double loss = 0.0;
  for (std::size_t j = 0; j < code.size(); ++j) {
    auto w = emb.output_row(path[j]);
    const double x = dot(v, w);
    const double sign = code[j] ? -1.0 : 1.0;
    loss += softplus(-sign * x);
    const double dx = -sign * sigmoid(-sign * x);
    for (int d = 0; d < dim; ++d) {
      grad_v[d] += dx * w[d];
      grad_w[d] = dx * v[d];
    }
    apply_output_row(emb, path[j], grad_w, lr, opt);
  }
  apply_input_row(emb, center_id, grad_v, lr, opt);
  return loss;
}

double cbow_ns_step(EmbeddingMatrix& emb, const NoiseSampler& sampler,
                    std::span<const int> context_ids, int center_id, int k,
                    double lr, SplitMix64& rng, StepOptimizer* opt) {
  if (context_ids.empty())
    throw std::runtime_error("cbow step needs at least one context word");
  const int dim = emb.dim();
  const double inv_n = 1.0 / static_cast<double>(context_ids.size());

  std::vector<double> h(dim, 0.0);
  for (int c : context_ids) {
    auto row = emb.input_row(c);
    for (int d = 0; d < dim; ++d) h[d] += row[d];
  }
  for (int d = 0; d < dim; ++d) h[d] *= inv_n;

  std::vector<ScoredTarget> targets;
  targets.reserve(k + 1);
  targets.push_back({center_id, 1.0, 0.0});
  for (int neg : sample_negatives(sampler, k, center_id, rng))
    targets.push_back({neg, 0.0, 0.0});

  // Score everything at the current point before touching any parameter, so
  // repeated negative draws still receive the exact summed gradient.
  double loss = 0.0;
  std::vector<double> grad_h(dim, 0.0);
  for (auto& t : targets) {
    auto o = emb.output_row(t.id);
    const double x = dot({h.data(), h.size()}, o);
    loss += t.label > 0.5 ? softplus(-x) : softplus(x);
    t.dx = sigmoid(x) - t.label;
    for (int d = 0; d < dim; ++d) grad_h[d] += t.dx * o[d];
  }
  std::vector<double> grad_row(dim);
  for (const auto& t : targets) {
    for (int d = 0; d < dim; ++d) grad_row[d] = t.dx * h[d];
    apply_output_row(emb, t.id, grad_row, lr, opt);
  }
  for (int d = 0; d < dim; ++d) grad_row[d] = inv_n * grad_h[d];
  for (int c : context_ids) apply_input_row(emb, c, grad_row, lr, opt);
  return loss;
}

double skipgram_ns_step(EmbeddingMatrix& emb, const NoiseSampler& sampler,
                        int center_id, int context_id, int k, double lr,
                        double weight, SplitMix64& rng, StepOptimizer* opt) {
  const int dim = emb.dim();
  auto v = emb.input_row(center_id);

  std::vector<ScoredTarget> targets;
  targets.reserve(k + 1);
  targets.push_back({context_id, 1.0, 0.0});
  for (int neg : sample_negatives(sampler, k, context_id, rng))
    targets.push_back({neg, 0.0, 0.0});

  double loss = 0.0;
  std::vector<double> grad_v(dim, 0.0);
  for (auto& t : targets) {
    auto o = emb.output_row(t.id);
    const double x = dot(v, o);
    loss += t.label > 0.5 ? softplus(-x) : softplus(x);
    t.dx = sigmoid(x) - t.label;
    for (int d = 0; d < dim; ++d) grad_v[d] += t.dx * o[d];
  }
  std::vector<double> grad_row(dim);
  for (const auto& t : targets) {
    for (int d = 0; d < dim; ++d) grad_row[d] = weight * t.dx * v[d];
    apply_output_row(emb, t.id, grad_row, lr, opt);
  }
  for (int d = 0; d < dim; ++d) grad_v[d] *= weight;
  apply_input_row(emb, center_id, grad_v, lr, opt);
  return loss;
}

namespace detail {

SgnsEngine::SgnsEngine(EmbeddingMatrix& emb, const NoiseSampler* sampler,
                       const HuffmanTree* tree, const TrainConfig& cfg,
                       std::int64_t scheduled_updates, SplitMix64 rng,
                       StepOptimizer* opt)
    : emb_(emb),
      sampler_(sampler),
      tree_(tree),
      cfg_(cfg),
      scheduled_updates_(scheduled_updates),
      rng_(rng),
      opt_(opt) {}

double SgnsEngine::scheduled_lr() const {
  const double frac =
      scheduled_updates_ > 0
          ? static_cast<double>(processed_) / scheduled_updates_
          : 0.0;
  return cfg_.base_lr * std::max(1.0 - frac, 1e-4);
}

void SgnsEngine::train_sentence(std::span<const int> ids,
                                const PositionHook* hook) {
  const int n = static_cast<int>(ids.size());
  std::vector<int> contexts;
  for (int pos = 0; pos < n; ++pos) {
    const double lr = scheduled_lr();
    ++processed_;
    const int b = 1 + static_cast<int>(rng_.next_below(cfg_.window));
    contexts.clear();
    for (int c = std::max(0, pos - b); c <= std::min(n - 1, pos + b); ++c)
      if (c != pos) contexts.push_back(ids[c]);

    if (!contexts.empty()) {
      switch (cfg_.model) {
        case EmbedModel::kCbowNs:
          epoch_loss += cbow_ns_step(emb_, *sampler_,
                                     {contexts.data(), contexts.size()},
                                     ids[pos], cfg_.negatives, lr, rng_, opt_);
          ++steps;
          break;
        case EmbedModel::kSkipgramHs:
          for (int c : contexts) {
            epoch_loss += skipgram_hs_step(emb_, *tree_, ids[pos], c, lr, opt_);
            ++steps;
          }
          break;
        case EmbedModel::kSkipgramNs:
          for (int c : contexts) {
            epoch_loss +=
                skipgram_ns_step(emb_, *sampler_, ids[pos], c, cfg_.negatives,
                                 lr, 1.0, rng_, opt_);
            ++steps;
          }
          break;
      }
    }
    if (hook && *hook) (*hook)(pos, lr);
  }
}

double SgnsEngine::weighted_context_steps(int center_id,
                                          std::span<const int> ids, int around,
                                          double weight, double lr) {
  const int n = static_cast<int>(ids.size());
  const int b = 1 + static_cast<int>(rng_.next_below(cfg_.window));
  double loss = 0.0;
  for (int c = std::max(0, around - b); c <= std::min(n - 1, around + b); ++c) {
    if (c == around) continue;
    loss += skipgram_ns_step(emb_, *sampler_, center_id, ids[c],
                             cfg_.negatives, lr, weight, rng_, opt_);
    ++steps;
  }
  epoch_loss += loss;
  return loss;
}

std::vector<std::vector<int>> corpus_to_ids(const Corpus& corpus,
                                            const Vocabulary& vocab) {
  std::vector<std::vector<int>> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    std::vector<int> ids;
    ids.reserve(s.tokens.size());
    for (const auto& t : s.tokens) {
      auto id = vocab.lookup(t.surface);
      if (id) ids.push_back(*id);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

Corpus concat_corpora(std::initializer_list<const Corpus*> parts,
                      const std::string& origin) {
  Corpus out;
  out.origin = origin;
  for (const Corpus* part : parts)
    out.sentences.insert(out.sentences.end(), part->sentences.begin(),
                         part->sentences.end());
  return out;
}

}  // namespace detail

namespace {

// Applies the subsampling filter used by the cited embedding models: token
// kept with probability (sqrt(f/t) + 1) * t/f where f is the corpus
// frequency. Draws one uniform per token, so it is off the rng stream
// entirely when threshold == 0.
std::vector<int> subsample_sentence(const std::vector<int>& ids,
                                    const Vocabulary& vocab,
                                    std::int64_t total_count, double threshold,
                                    SplitMix64& rng) {
  std::vector<int> kept;
  kept.reserve(ids.size());
  for (int id : ids) {
    const double f =
        static_cast<double>(vocab.count(id)) / static_cast<double>(total_count);
    if (f > 0.0) {
      const double keep = (std::sqrt(f / threshold) + 1.0) * threshold / f;
      if (keep < 1.0 && rng.next_double() >= keep) continue;
    }
    kept.push_back(id);
  }
  return kept;
}

void run_training_pass(EmbeddingMatrix& emb, const NoiseSampler* sampler,
                       const HuffmanTree* tree, const TrainConfig& cfg,
                       const std::vector<std::vector<int>>& sentences,
                       std::int64_t scheduled, std::uint64_t stream_id,
                       StepOptimizer* opt) {
  detail::SgnsEngine engine(emb, sampler, tree, cfg, scheduled,
                            SplitMix64(cfg.seed).split(stream_id), opt);
  const Vocabulary& vocab = emb.vocab();
  const std::int64_t total_count = vocab.total_count();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    engine.epoch_loss = 0.0;
    engine.steps = 0;
    for (const auto& ids : sentences) {
      if (cfg.subsample > 0.0) {
        auto kept = subsample_sentence(ids, vocab, total_count, cfg.subsample,
                                       engine.rng());
        engine.train_sentence({kept.data(), kept.size()}, nullptr);
      } else {
        engine.train_sentence({ids.data(), ids.size()}, nullptr);
      }
    }
    if (cfg.verbose && engine.steps > 0) {
      std::cerr << "epoch " << epoch + 1 << "/" << cfg.epochs
                << " mean step loss " << engine.epoch_loss / engine.steps
                << "\n";
    }
  }
}

}  // namespace

EmbeddingMatrix train_mono(const Corpus& corpus, const TrainConfig& cfg) {
  if (cfg.window < 1) throw std::runtime_error("window must be >= 1");
  if (cfg.epochs < 1) throw std::runtime_error("epochs must be >= 1");
  Vocabulary vocab = build_vocabulary(corpus, cfg.min_count);
  EmbeddingMatrix emb = init_embeddings(vocab, cfg.dim, cfg.seed);

  std::optional<NoiseSampler> owned_sampler;
  std::optional<HuffmanTree> owned_tree;
  const NoiseSampler* sampler = nullptr;
  const HuffmanTree* tree = nullptr;
  if (cfg.model == EmbedModel::kSkipgramHs) {
    owned_tree.emplace(vocab);
    tree = &*owned_tree;
  } else {
    owned_sampler.emplace(vocab);
    sampler = &*owned_sampler;
  }

  auto sentences = detail::corpus_to_ids(corpus, vocab);
  std::int64_t total_tokens = 0;
  for (const auto& s : sentences) total_tokens += s.size();
  const std::int64_t scheduled = total_tokens * cfg.epochs;

  std::optional<StepOptimizer> opt;
  if (cfg.use_adagrad) opt.emplace(emb, cfg.base_lr);
  StepOptimizer* opt_ptr = opt ? &*opt : nullptr;

  if (cfg.threads <= 1) {
    run_training_pass(emb, sampler, tree, cfg, sentences, scheduled, 1,
                      opt_ptr);
  } else {
    // Racy sharded mode: every worker updates the shared tables (and the
    // shared accumulators) without locks. Statistically fine, not
    // reproducible.
    std::vector<std::thread> workers;
    const int t = cfg.threads;
    for (int w = 0; w < t; ++w) {
      workers.emplace_back([&, w] {
        std::vector<std::vector<int>> shard;
        for (std::size_t i = w; i < sentences.size(); i += t)
          shard.push_back(sentences[i]);
        std::int64_t shard_tokens = 0;
        for (const auto& s : shard) shard_tokens += s.size();
        run_training_pass(emb, sampler, tree, cfg, shard,
                          shard_tokens * cfg.epochs, 1 + w, opt_ptr);
      });
    }
    for (auto& worker : workers) worker.join();
  }
  if (!cfg.keep_outputs) emb.finalize();
  return emb;
}

EmbeddingMatrix train_bics(const Corpus& mono_ar, const Corpus& mono_en,
                           const Corpus& cs, const Corpus& extra_text,
                           const TrainConfig& cfg) {
  if (cfg.model == EmbedModel::kSkipgramNs)
    throw std::runtime_error("bics trains CbowNs or SkipgramHs");
  if (cs.sentences.empty())
    std::cerr << "warning: no code-switched sentences; the two languages "
                 "have no glue and will not share structure\n";
  Corpus all = detail::concat_corpora({&mono_ar, &mono_en, &cs, &extra_text},
                                      "bics-training");
  return train_mono(all, cfg);
}

}  // namespace cslm
