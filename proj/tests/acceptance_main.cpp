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

// Acceptance suite: every release-gating property, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cslm/bicca.hpp"
#include "cslm/bicvm.hpp"
#include "cslm/biskip.hpp"
#include "cslm/corpus.hpp"
#include "cslm/embed.hpp"
#include "cslm/embedding.hpp"
#include "cslm/evalcat.hpp"
#include "cslm/huffman.hpp"
#include "cslm/lm.hpp"
#include "cslm/rng.hpp"
#include "cslm/sampling.hpp"
#include "cslm/synth.hpp"

namespace {

using namespace cslm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vocabulary make_vocab(int words, SplitMix64& rng) {
  Vocabulary v;
  for (int i = 0; i < words; ++i)
    v.add("w" + std::to_string(i), 1 + rng.next_below(20));
  v.add(Vocabulary::kSentenceStart, 0);
  v.add(Vocabulary::kSentenceEnd, 0);
  v.add(Vocabulary::kUnknown, 0);
  return v;
}

void randomize(EmbeddingMatrix& emb, SplitMix64& rng, double scale) {
  for (double& x : emb.input_data()) x = rng.uniform(-scale, scale);
  for (double& x : emb.output_data()) x = rng.uniform(-scale, scale);
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// ------------------------------------------------------------------- C1 --

// Worst relative error between the analytic gradient of one step function
// (read off a unit-lr update) and central finite differences of its loss.
template <typename StepFn>
double step_gradient_error(EmbeddingMatrix& emb, const StepFn& step) {
  EmbeddingMatrix probe = emb;
  step(probe, 1.0);
  const double h = 1e-5;
  double worst = 0.0;
  const auto scan = [&](std::vector<double>& params,
                        const std::vector<double>& after) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double grad = params[i] - after[i];
      if (grad == 0.0) continue;  // untouched parameter
      const double saved = params[i];
      params[i] = saved + h;
      EmbeddingMatrix tmp = emb;  // evaluate loss without mutating
      const double up = step(tmp, 0.0);
      params[i] = saved - h;
      tmp = emb;
      const double down = step(tmp, 0.0);
      params[i] = saved;
      worst = std::max(worst, rel_error((up - down) / (2 * h), grad));
    }
  };
  scan(emb.input_data(), probe.input_data());
  scan(emb.output_data(), probe.output_data());
  return worst;
}

bool criterion1(std::string& detail) {
  const auto start = Clock::now();
  SplitMix64 rng(101);
  double worst_hs = 0, worst_cbow = 0, worst_sgns = 0, worst_bicvm = 0,
         worst_lstm = 0;

  for (int trial = 0; trial < 100; ++trial) {
    Vocabulary v = make_vocab(5 + rng.next_below(4), rng);
    EmbeddingMatrix emb = init_embeddings(v, 5, rng.next());
    randomize(emb, rng, 0.8);
    HuffmanTree tree(v);
    const int center = rng.next_below(v.regular_size());
    const int context = rng.next_below(v.regular_size());
    worst_hs = std::max(
        worst_hs, step_gradient_error(emb, [&](EmbeddingMatrix& e, double lr) {
          return skipgram_hs_step(e, tree, center, context, lr);
        }));
  }

  for (int trial = 0; trial < 100; ++trial) {
    Vocabulary v = make_vocab(6 + rng.next_below(3), rng);
    EmbeddingMatrix emb = init_embeddings(v, 5, rng.next());
    randomize(emb, rng, 0.8);
    NoiseSampler sampler(v);
    std::vector<int> ctx = {static_cast<int>(rng.next_below(v.regular_size())),
                            static_cast<int>(rng.next_below(v.regular_size())),
                            static_cast<int>(rng.next_below(v.regular_size()))};
    const int center = rng.next_below(v.regular_size());
    const SplitMix64 frozen(rng.next());
    worst_cbow = std::max(
        worst_cbow,
        step_gradient_error(emb, [&](EmbeddingMatrix& e, double lr) {
          SplitMix64 r = frozen;
          return cbow_ns_step(e, sampler, ctx, center, 2, lr, r);
        }));
  }

  for (int trial = 0; trial < 100; ++trial) {
    Vocabulary v = make_vocab(6 + rng.next_below(3), rng);
    EmbeddingMatrix emb = init_embeddings(v, 5, rng.next());
    randomize(emb, rng, 0.8);
    NoiseSampler sampler(v);
    const int center = rng.next_below(v.regular_size());
    const int context = rng.next_below(v.regular_size());
    const SplitMix64 frozen(rng.next());
    worst_sgns = std::max(
        worst_sgns,
        step_gradient_error(emb, [&](EmbeddingMatrix& e, double lr) {
          SplitMix64 r = frozen;
          return skipgram_ns_step(e, sampler, center, context, 2, lr, 1.0, r);
        }));
  }

  // bicvm subgradient against finite differences, away from hinge kinks
  int done = 0;
  while (done < 100) {
    const int dim = 3;
    Vocabulary va = make_vocab(4, rng), vb = make_vocab(4, rng);
    BicvmTables tables{EmbeddingMatrix(va, dim, false),
                       EmbeddingMatrix(vb, dim, false)};
    for (double& x : tables.side_a.input_data()) x = rng.uniform(-1, 1);
    for (double& x : tables.side_b.input_data()) x = rng.uniform(-1, 1);
    const Composition comp =
        rng.next_below(2) ? Composition::kBigram : Composition::kAdditive;
    const std::vector<int> sa = {0, 2, 1};
    const std::vector<int> sb = {1, 3};
    const std::vector<std::vector<int>> noise = {{0, 2}, {2, 3, 1}};
    const double margin = 1.0;

    const auto loss_at = [&] {
      SparseGrad ta, tb;
      return bicvm_pair_gradient(tables, sa, sb, noise, margin, comp, ta, tb);
    };
    // reject states near a kink where the subgradient jumps
    {
      bool kinky = false;
      const double base = loss_at();
      for (double h : {1e-3, -1e-3}) {
        for (double& x : tables.side_a.input_data()) x += h;
        const double moved = loss_at();
        for (double& x : tables.side_a.input_data()) x -= h;
        if (std::abs(moved - base) > 1e3) kinky = true;
      }
      SparseGrad ga, gb;
      bicvm_pair_gradient(tables, sa, sb, noise, margin, comp, ga, gb);
      std::vector<std::span<const double>> wa, wb;
      for (int id : sa) wa.push_back(tables.side_a.input_row(id));
      for (int id : sb) wb.push_back(tables.side_b.input_row(id));
      auto a = compose_sentence(wa, comp);
      auto b = compose_sentence(wb, comp);
      double e_ab = 0;
      for (int d = 0; d < dim; ++d) e_ab += (a[d] - b[d]) * (a[d] - b[d]);
      for (const auto& nids : noise) {
        std::vector<std::span<const double>> wn;
        for (int id : nids) wn.push_back(tables.side_b.input_row(id));
        auto n = compose_sentence(wn, comp);
        double e_an = 0;
        for (int d = 0; d < dim; ++d) e_an += (a[d] - n[d]) * (a[d] - n[d]);
        if (std::abs(margin + e_ab - e_an) < 1e-2) kinky = true;
      }
      if (kinky) continue;
    }
    ++done;

    SparseGrad ga, gb;
    bicvm_pair_gradient(tables, sa, sb, noise, margin, comp, ga, gb);
    const double h = 1e-6;
    const auto scan = [&](EmbeddingMatrix& side, SparseGrad& grads) {
      for (auto& [id, grad] : grads) {
        auto row = side.input_row(id);
        for (int d = 0; d < 3; ++d) {
          const double saved = row[d];
          row[d] = saved + h;
          const double up = loss_at();
          row[d] = saved - h;
          const double down = loss_at();
          row[d] = saved;
          const double fd = (up - down) / (2 * h);
          if (fd == 0.0 && grad[d] == 0.0) continue;
          worst_bicvm = std::max(
              worst_bicvm,
              std::abs(fd - grad[d]) /
                  std::max({std::abs(fd), std::abs(grad[d]), 1e-4}));
        }
      }
    };
    scan(tables.side_a, ga);
    scan(tables.side_b, gb);
  }

  // LSTM gradients on a tiny model: 4 words + 3 reserved = |V| = 7
  for (int trial = 0; trial < 100; ++trial) {
    Vocabulary v = make_vocab(4, rng);
    LmConfig cfg;
    cfg.dim = 4;
    cfg.hidden = 5;
    cfg.seed = rng.next();
    LstmLmParams p = init_lm_params(v, cfg);
    const auto shake = [&](Eigen::MatrixXd& m) {
      for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-0.7, 0.7);
    };
    shake(p.embedding);
    shake(p.w_input);
    shake(p.w_recurrent);
    shake(p.w_output);
    for (long i = 0; i < p.bias.size(); ++i) p.bias[i] = rng.uniform(-0.7, 0.7);
    for (long i = 0; i < p.b_output.size(); ++i)
      p.b_output[i] = rng.uniform(-0.7, 0.7);

    std::vector<int> seq;
    for (int i = 0; i < 4; ++i) seq.push_back(rng.next_below(4));
    const std::vector<std::vector<int>> batch = {seq};
    LmGradients g;
    lm_loss_and_grads(p, batch, g, 0.0);
    const auto loss_at = [&] {
      LmGradients scratch;
      return lm_loss_and_grads(p, batch, scratch, 0.0);
    };
    const double h = 1e-5;
    const auto scan = [&](Eigen::Ref<Eigen::MatrixXd> tensor,
                          const Eigen::MatrixXd& grad) {
      for (long r = 0; r < tensor.rows(); ++r) {
        for (long c = 0; c < tensor.cols(); ++c) {
          const double saved = tensor(r, c);
          tensor(r, c) = saved + h;
          const double up = loss_at();
          tensor(r, c) = saved - h;
          const double down = loss_at();
          tensor(r, c) = saved;
          const double fd = (up - down) / (2 * h);
          if (fd == 0.0 && grad(r, c) == 0.0) continue;
          worst_lstm = std::max(
              worst_lstm, std::abs(fd - grad(r, c)) /
                              std::max({std::abs(fd), std::abs(grad(r, c)),
                                        1e-6}));
        }
      }
    };
    scan(p.embedding, g.embedding);
    scan(p.w_input, g.w_input);
    scan(p.w_recurrent, g.w_recurrent);
    scan(p.w_output, g.w_output);
    scan(p.bias, g.bias);
    scan(p.b_output, g.b_output);
  }

  const double elapsed = seconds_since(start);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "worst rel err: hs %.2e cbow %.2e sgns %.2e bicvm %.2e "
                "lstm %.2e (%.1fs)",
                worst_hs, worst_cbow, worst_sgns, worst_bicvm, worst_lstm,
                elapsed);
  detail = buf;
  return worst_hs <= 1e-4 && worst_cbow <= 1e-4 && worst_sgns <= 1e-4 &&
         worst_bicvm <= 1e-4 && worst_lstm <= 1e-3 && elapsed < 60.0;
}

// ------------------------------------------------------------------- C2 --

bool criterion2(std::string& detail) {
  SplitMix64 rng(202);
  Vocabulary v = make_vocab(6, rng);
  bool ok = true;
  std::ostringstream os;

  {
    EmbeddingMatrix emb(v, 8, true);  // all zeros
    NoiseSampler sampler(v);
    SplitMix64 r(1);
    const int k = 3;
    const double cbow =
        cbow_ns_step(emb, sampler, std::vector<int>{1, 2}, 0, k, 0.0, r);
    const double sgns = skipgram_ns_step(emb, sampler, 0, 1, k, 0.0, 1.0, r);
    const double expect = (k + 1) * std::log(2.0);
    ok = ok && std::abs(cbow - expect) <= 1e-9 &&
         std::abs(sgns - expect) <= 1e-9;
    os << "ns err " << std::abs(cbow - expect);
  }
  {
    EmbeddingMatrix emb(v, 8, true);
    HuffmanTree tree(v);
    const double hs = skipgram_hs_step(emb, tree, 0, 2, 0.0);
    const double expect = tree.code(2).size() * std::log(2.0);
    ok = ok && std::abs(hs - expect) <= 1e-9;
    os << ", hs err " << std::abs(hs - expect);
  }
  {
    LmConfig cfg;
    cfg.dim = 4;
    cfg.hidden = 5;
    LstmLmParams p = init_lm_params(v, cfg);
    p.embedding.setZero();
    p.w_input.setZero();
    p.w_recurrent.setZero();
    p.bias.setZero();
    p.w_output.setZero();
    p.b_output.setZero();
    LmGradients g;
    const double loss =
        lm_loss_and_grads(p, {{0, 1, 2}}, g, 0.0);
    ok = ok && std::abs(loss - std::log(v.size())) <= 1e-9;

    Corpus eval;
    eval.sentences.push_back(tokenize("w0 w1 w2"));
    eval.sentences.push_back(tokenize("w3 w4"));
    const EvalResult r = perplexity(p, eval);
    const double ppl_err =
        std::abs(r.perplexity - static_cast<double>(v.size()));
    ok = ok && ppl_err <= 1e-9 * v.size();
    os << ", lm err " << std::abs(loss - std::log(v.size())) << ", ppl err "
       << ppl_err;
  }
  detail = os.str();
  return ok;
}

// ------------------------------------------------------------------- C3 --

Eigen::VectorXd cca_eigen_oracle(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y, double ridge) {
  const long n = x.rows(), d = x.cols();
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const Eigen::RowVectorXd my = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mx;
  const Eigen::MatrixXd yc = y.rowwise() - my;
  const double s = 1.0 / static_cast<double>(n - 1);
  Eigen::MatrixXd sxx = xc.transpose() * xc * s;
  Eigen::MatrixXd syy = yc.transpose() * yc * s;
  const Eigen::MatrixXd sxy = xc.transpose() * yc * s;
  sxx += ridge * sxx.trace() / d * Eigen::MatrixXd::Identity(d, d);
  syy += ridge * syy.trace() / d * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd a =
      sxx.fullPivLu().solve(sxy * syy.fullPivLu().solve(sxy.transpose()));
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a);
  std::vector<double> rho2;
  for (long i = 0; i < d; ++i)
    rho2.push_back(std::clamp(eig.eigenvalues()[i].real(), 0.0, 1.0));
  std::sort(rho2.begin(), rho2.end(), std::greater<>());
  Eigen::VectorXd out(d);
  for (long i = 0; i < d; ++i) out[i] = std::sqrt(rho2[i]);
  return out;
}

bool criterion3(std::string& detail) {
  const auto start = Clock::now();
  SplitMix64 rng(303);
  const auto random_matrix = [&](long n, long d) {
    Eigen::MatrixXd m(n, d);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < d; ++j) m(i, j) = rng.uniform(-1, 1);
    return m;
  };
  const auto random_orthogonal = [&](int d) {
    return Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(d, d))
        .householderQ() *
        Eigen::MatrixXd::Identity(d, d);
  };

  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + rng.next_below(9);  // 2..10
    const int n = d + 5 + rng.next_below(150);
    Eigen::MatrixXd x = random_matrix(n, d);
    Eigen::MatrixXd y =
        0.6 * x * random_orthogonal(d) + 0.7 * random_matrix(n, d);
    CcaModel m = cca_fit(x, y, 1.0, 1e-8);
    Eigen::VectorXd oracle = cca_eigen_oracle(x, y, 1e-8);
    for (int i = 0; i < d; ++i)
      worst = std::max(worst, std::abs(m.correlations[i] - oracle[i]));
  }

  double worst_identity = 0.0;
  {
    Eigen::MatrixXd x = random_matrix(60, 6);
    CcaModel same = cca_fit(x, x, 1.0, 1e-10);
    for (int i = 0; i < 6; ++i)
      worst_identity =
          std::max(worst_identity, std::abs(same.correlations[i] - 1.0));
    CcaModel rotated = cca_fit(x, x * random_orthogonal(6), 1.0, 1e-10);
    for (int i = 0; i < 6; ++i)
      worst_identity =
          std::max(worst_identity, std::abs(rotated.correlations[i] - 1.0));
  }

  const double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "worst oracle gap %.2e, identity gap %.2e (%.1fs)", worst,
                worst_identity, elapsed);
  detail = buf;
  return worst <= 1e-6 && worst_identity <= 1e-6 && elapsed < 60.0;
}

// ------------------------------------------------------------------- C4 --

std::int64_t optimal_weighted_length(std::vector<std::int64_t> counts) {
  std::sort(counts.begin(), counts.end(), std::greater<>());
  const int n = static_cast<int>(counts.size());
  const int max_len = n - 1;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  const std::int64_t unit = 1LL << max_len;
  const auto rec = [&](auto&& self, int i, int min_len, std::int64_t budget,
                       std::int64_t cost) -> void {
    if (cost >= best) return;
    if (i == n) {
      best = cost;
      return;
    }
    for (int len = min_len; len <= max_len; ++len) {
      const std::int64_t used = unit >> len;
      if (budget - used < (n - i - 1)) continue;
      self(self, i + 1, len, budget - used, cost + counts[i] * len);
    }
  };
  rec(rec, 0, 1, unit, 0);
  return best;
}

bool criterion4(std::string& detail) {
  SplitMix64 rng(404);
  int huffman_ok = 0;
  const int huffman_trials = 100;
  for (int trial = 0; trial < huffman_trials; ++trial) {
    const int n = 2 + rng.next_below(7);  // 2..8
    Vocabulary v;
    std::vector<std::int64_t> counts;
    for (int i = 0; i < n; ++i) {
      const std::int64_t c = 1 + rng.next_below(100);
      v.add("w" + std::to_string(i), c);
      counts.push_back(c);
    }
    HuffmanTree tree(v);
    std::int64_t weighted = 0;
    for (int id = 0; id < n; ++id)
      weighted += counts[id] * static_cast<std::int64_t>(tree.code(id).size());
    if (weighted == optimal_weighted_length(counts)) ++huffman_ok;
  }

  int purity_ok = 0;
  const int purity_trials = 1000;
  for (int trial = 0; trial < purity_trials; ++trial) {
    const int n_items = 2 + rng.next_below(11);
    const int n_clusters = 1 + rng.next_below(4);
    const int n_labels = 1 + rng.next_below(4);
    std::vector<int> assignment(n_items), gold(n_items);
    for (int i = 0; i < n_items; ++i) {
      assignment[i] = rng.next_below(n_clusters);
      gold[i] = rng.next_below(n_labels);
    }
    // direct evaluation of the purity formula
    std::int64_t agree = 0;
    for (int c = 0; c < n_clusters; ++c) {
      std::vector<std::int64_t> tally(n_labels, 0);
      for (int i = 0; i < n_items; ++i)
        if (assignment[i] == c) ++tally[gold[i]];
      agree += *std::max_element(tally.begin(), tally.end());
    }
    const double expect = static_cast<double>(agree) / n_items;
    if (purity(assignment, gold) == expect) ++purity_ok;
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf), "huffman %d/%d optimal, purity %d/%d exact",
                huffman_ok, huffman_trials, purity_ok, purity_trials);
  detail = buf;
  return huffman_ok == huffman_trials && purity_ok == purity_trials;
}

// ------------------------------------------------------------------- C5 --

bool criterion5(std::string& detail) {
  SplitMix64 rng(505);
  Vocabulary v;
  for (int i = 0; i < 50; ++i)
    v.add("w" + std::to_string(i), 1 + rng.next_below(1000));
  v.add(Vocabulary::kSentenceStart, 0);
  v.add(Vocabulary::kSentenceEnd, 0);
  v.add(Vocabulary::kUnknown, 0);
  NoiseSampler sampler = build_noise_table(v);

  const int draws = 1000000;
  std::vector<std::int64_t> hits(v.size(), 0);
  SplitMix64 draw_rng(99);
  for (int i = 0; i < draws; ++i) ++hits[sampler.sample(draw_rng)];
  double tv = 0.0;
  for (int id = 0; id < v.size(); ++id)
    tv += std::abs(static_cast<double>(hits[id]) / draws -
                   sampler.probability(id));
  tv /= 2;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "TV distance %.5f over 1e6 draws", tv);
  detail = buf;
  return tv <= 0.01;
}

// --------------------------------------------------------------- C6, C7 --

struct SynthFixture {
  SynthWorld world;
  SynthCorpus emb_data;
  SynthCorpus lm_data;
  EmbeddingMatrix bics;  // d = 50, trained once

  SynthFixture()
      : world(gen_world(500, 10, 77, /*switch_prob=*/0.5, /*rank_window=*/2)),
        emb_data(gen_corpus(world, 5000, 5000, 1000, {6, 12}, 0)),
        lm_data(gen_corpus(world, 250, 150, 600, {6, 12}, 1)) {
    Corpus ar = select_sentences(emb_data.corpus, {SentenceKind::kMonoArabic});
    Corpus en = select_sentences(emb_data.corpus, {SentenceKind::kMonoEnglish});
    Corpus cs =
        select_sentences(emb_data.corpus, {SentenceKind::kCodeSwitched});
    TrainConfig cfg;
    cfg.dim = 50;
    cfg.window = 5;
    cfg.negatives = 10;
    cfg.epochs = 60;
    cfg.base_lr = 0.1;
    cfg.seed = 1;
    cfg.model = EmbedModel::kCbowNs;
    bics = train_bics(ar, en, cs, Corpus{}, cfg);
  }
};

bool criterion6(const SynthFixture& fix, std::string& detail) {
  const auto start = Clock::now();
  auto parts = split_corpus(fix.lm_data.corpus, {800, 100, 100}, 7);
  const Corpus& train = parts[0];
  const Corpus& dev = parts[1];

  int improved = 0;
  std::vector<double> rels;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    LmConfig cfg;
    cfg.dim = 50;
    cfg.hidden = 64;
    cfg.batch_size = 16;
    cfg.base_lr = 0.1;
    cfg.max_epochs = 12;
    cfg.patience = 2;
    cfg.seed = seed;
    LmTrainOutput base = train_lm(train, dev, cfg);
    LmTrainOutput init = train_lm(train, dev, cfg, &fix.bics);
    const double b = base.history.dev_ppl[base.history.best_epoch];
    const double p = init.history.dev_ppl[init.history.best_epoch];
    if (p < b) ++improved;
    rels.push_back((b - p) / b);
  }
  std::sort(rels.begin(), rels.end());
  const double median = 0.5 * (rels[4] + rels[5]);
  const double elapsed = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "improved %d/10 seeds, median rel gain %.1f%% (%.0fs)",
                improved, 100 * median, elapsed);
  detail = buf;
  return improved >= 8 && median >= 0.05 && elapsed < 900.0;
}

double mean_pair_cosine(const EmbeddingMatrix& emb,
                        const TranslationLexicon& lex) {
  double total = 0;
  int n = 0;
  for (const auto& [ar, en] : lex.pairs) {
    auto a = emb.vocab().lookup(ar);
    auto b = emb.vocab().lookup(en);
    if (!a || !b) continue;
    total += cosine(emb.input_row(*a), emb.input_row(*b));
    ++n;
  }
  return n ? total / n : 0.0;
}

bool criterion7(const SynthFixture& fix, std::string& detail) {
  // (a) translation retrieval in the jointly trained space
  const Vocabulary& v = fix.bics.vocab();
  std::vector<int> en_ids;
  for (int id = 0; id < v.size(); ++id)
    if (!v.is_reserved(id) &&
        tag_language(v.word(id)) == LanguageTag::kEnglish)
      en_ids.push_back(id);
  const TranslationLexicon lex = fix.world.gold_lexicon();
  int hits = 0, total = 0;
  for (const auto& [ar, en] : lex.pairs) {
    auto ia = v.lookup(ar);
    auto ie = v.lookup(en);
    if (!ia || !ie) continue;
    ++total;
    auto va = fix.bics.input_row(*ia);
    double best = -2;
    int best_id = -1;
    for (int id : en_ids) {
      const double c = cosine(va, fix.bics.input_row(id));
      if (c > best) {
        best = c;
        best_id = id;
      }
    }
    if (best_id == *ie) ++hits;
  }
  const double p_at_1 = static_cast<double>(hits) / total;

  // (b) the correlation projection pulls translations closer when the
  // aligned training was too small to saturate
  std::vector<AlignedSentencePair> pairs(fix.emb_data.parallel.begin(),
                                         fix.emb_data.parallel.begin() + 200);
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BiskipConfig cfg;
    cfg.dim = 50;
    cfg.window = 5;
    cfg.negatives = 5;
    cfg.epochs = 1;
    cfg.cross_weight = 1.0;
    cfg.seed = seed;
    EmbeddingMatrix biskip = train_biskip(pairs, Corpus{}, cfg);
    BiccaConfig cca;
    cca.k_fraction = 0.8;
    cca.ridge = 1e-8;
    EmbeddingMatrix projected = bicca_on_biskip(biskip, lex, cca);
    if (mean_pair_cosine(projected, lex) > mean_pair_cosine(biskip, lex))
      ++improved;
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "P@1 %.3f over %d pairs (chance 0.002); projection improved "
                "%d/10 seeds",
                p_at_1, total, improved);
  detail = buf;
  return p_at_1 >= 0.5 && improved >= 8;
}

// ------------------------------------------------------------------- C8 --

bool criterion8(std::string& detail) {
  std::vector<AlignedSentencePair> parallel;
  const char* srcs[] = {"قط كلب بيت شجرة", "كلب قط", "بيت قط شجرة"};
  const char* tgts[] = {"cat dog house tree", "dog cat", "house cat tree"};
  for (int i = 0; i < 3; ++i) {
    AlignedSentencePair p;
    p.src = tokenize(srcs[i]);
    p.tgt = tokenize(tgts[i]);
    parallel.push_back(p);
  }

  BiskipConfig bcfg;
  bcfg.dim = 9;
  bcfg.window = 4;
  bcfg.negatives = 6;
  bcfg.cross_weight = 0.0;
  bcfg.epochs = 3;
  bcfg.seed = 23;
  EmbeddingMatrix biskip = train_biskip(parallel, Corpus{}, bcfg);

  Corpus concat;
  for (const auto& p : parallel) {
    concat.sentences.push_back(p.src);
    concat.sentences.push_back(p.tgt);
  }
  TrainConfig mcfg;
  mcfg.dim = bcfg.dim;
  mcfg.window = bcfg.window;
  mcfg.negatives = bcfg.negatives;
  mcfg.epochs = bcfg.epochs;
  mcfg.base_lr = bcfg.base_lr;
  mcfg.min_count = 1;
  mcfg.seed = bcfg.seed;
  mcfg.model = EmbedModel::kSkipgramNs;
  EmbeddingMatrix plain = train_mono(concat, mcfg);

  const bool same = biskip.input_data() == plain.input_data();
  detail = same ? "beta=0 no-link run is bitwise identical to skip-gram NS"
                : "matrices differ";
  return same;
}

// ------------------------------------------------------------------- C9 --

double exhaustive_best_i2(const std::vector<std::vector<double>>& vectors,
                          int n) {
  std::vector<std::vector<double>> pts = vectors;
  for (auto& p : pts) {
    double s = 0;
    for (double x : p) s += x * x;
    s = std::sqrt(s);
    if (s > 0)
      for (double& x : p) x /= s;
  }
  const int total = static_cast<int>(pts.size());
  const std::size_t dim = pts[0].size();
  std::vector<int> assign(total, 0);
  double best = -1;
  while (true) {
    std::vector<std::vector<double>> sums(n, std::vector<double>(dim, 0.0));
    std::vector<int> count(n, 0);
    for (int i = 0; i < total; ++i) {
      ++count[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += pts[i][d];
    }
    bool valid = true;
    for (int c = 0; c < n; ++c) valid = valid && count[c] > 0;
    if (valid) {
      double i2 = 0;
      for (int c = 0; c < n; ++c) {
        double s = 0;
        for (double x : sums[c]) s += x * x;
        i2 += std::sqrt(s);
      }
      best = std::max(best, i2);
    }
    int pos = total - 1;
    while (pos >= 0 && assign[pos] == n - 1) assign[pos--] = 0;
    if (pos < 0) break;
    ++assign[pos];
  }
  return best;
}

bool criterion9(std::string& detail) {
  SplitMix64 rng(909);
  // (a) well-separated spherical clusters
  int pure_seeds = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const int dim = 10, per_cluster = 50, k = 5;
    std::vector<std::vector<double>> points;
    std::vector<int> gold;
    for (int c = 0; c < k; ++c) {
      std::vector<double> center(dim, 0.0);
      center[2 * c] = 3.0;
      center[2 * c + 1] = (c % 2) ? -3.0 : 3.0;
      for (int i = 0; i < per_cluster; ++i) {
        std::vector<double> p = center;
        for (double& x : p) x += rng.uniform(-0.5, 0.5);
        points.push_back(p);
        gold.push_back(c);
      }
    }
    ClusterResult r = repeated_bisection_cluster(points, k, 5000 + seed);
    if (purity(r.assignment, gold) >= 0.95) ++pure_seeds;
  }

  // (b) near-optimal criterion value on tiny instances
  int near_optimal = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const int count = 5 + rng.next_below(4);  // 5..8
    const int n = 2 + rng.next_below(2);      // 2..3
    std::vector<std::vector<double>> vectors;
    for (int i = 0; i < count; ++i) {
      std::vector<double> v(3);
      for (double& x : v) x = rng.uniform(-1, 1);
      vectors.push_back(v);
    }
    ClusterResult r = repeated_bisection_cluster(vectors, n, rng.next());
    if (r.i2 >= 0.98 * exhaustive_best_i2(vectors, n)) ++near_optimal;
  }

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "gaussian purity >= 0.95 on %d/10 seeds; within 2%% of "
                "optimum on %d/%d tiny instances",
                pure_seeds, near_optimal, trials);
  detail = buf;
  return pure_seeds >= 9 && near_optimal >= trials * 9 / 10;
}

// ------------------------------------------------------------------ C10 --

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion10(std::string& detail) {
  // in-process determinism of every trainer
  Corpus text;
  {
    std::istringstream in(
        "قط كلب بيت\nكلب قط\ncat dog house\ndog cat\nقط cat\nبيت house "
        "كلب\ndog كلب\n");
    text = parse_corpus(in, "inline");
  }
  std::vector<AlignedSentencePair> parallel;
  {
    AlignedSentencePair p;
    p.src = tokenize("قط كلب");
    p.tgt = tokenize("cat dog");
    p.links = {{0, 0}, {1, 1}};
    parallel.push_back(p);
  }

  bool ok = true;
  for (EmbedModel model : {EmbedModel::kCbowNs, EmbedModel::kSkipgramHs,
                           EmbedModel::kSkipgramNs}) {
    TrainConfig cfg;
    cfg.dim = 7;
    cfg.epochs = 3;
    cfg.seed = 5;
    cfg.model = model;
    ok = ok &&
         train_mono(text, cfg).input_data() == train_mono(text, cfg).input_data();
  }
  {
    BiskipConfig cfg;
    cfg.dim = 6;
    cfg.window = 3;
    cfg.negatives = 3;
    cfg.epochs = 2;
    cfg.seed = 8;
    ok = ok && train_biskip(parallel, text, cfg).input_data() ==
                   train_biskip(parallel, text, cfg).input_data();
  }
  {
    BicvmConfig cfg;
    cfg.dim = 6;
    cfg.epochs = 3;
    cfg.noise_count = 2;
    cfg.seed = 4;
    BicvmTables a = train_bicvm(parallel, text, cfg);
    BicvmTables b = train_bicvm(parallel, text, cfg);
    ok = ok && a.side_a.input_data() == b.side_a.input_data() &&
         a.side_b.input_data() == b.side_b.input_data();
  }
  {
    LmConfig cfg;
    cfg.dim = 5;
    cfg.hidden = 6;
    cfg.max_epochs = 3;
    cfg.patience = 5;
    cfg.seed = 3;
    LmTrainOutput a = train_lm(text, text, cfg);
    LmTrainOutput b = train_lm(text, text, cfg);
    ok = ok && a.params.embedding == b.params.embedding &&
         a.params.w_output == b.params.w_output;
  }
  if (!ok) {
    detail = "a trainer is not reproducible per seed";
    return false;
  }

  // manifest replay through the installed binary
  const fs::path dir =
      fs::temp_directory_path() / "cslm_acceptance_replay";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream corpus(dir / "text.txt", std::ios::binary);
    corpus << "قط cat بيت\nكلب dog\nقط كلب بيت\ncat dog house\nبيت house\n";
  }
  const std::string base = "cd " + dir.string() + " && " CSLM_BIN_PATH;
  const auto shell = [&](const std::string& tail) {
    const int status = std::system((base + " " + tail + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  bool replay_ok =
      shell("train-embed --method bics-cbow --text text.txt --out run.emb "
            "--dim 6 --epochs 2 --seed 11") == 0;
  const std::string first = slurp(dir / "run.emb");
  fs::remove(dir / "run.emb");
  replay_ok = replay_ok && shell("--manifest run.emb.manifest.json") == 0;
  replay_ok = replay_ok && slurp(dir / "run.emb") == first && !first.empty();
  fs::remove_all(dir);

  detail = replay_ok ? "all trainers bitwise reproducible; replay matched"
                     : "manifest replay failed to reproduce the output";
  return replay_ok;
}

// ------------------------------------------------------------------ C11 --

bool criterion11(std::string& detail) {
  const double overall = overall_monolingual(0.706, 0.468);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "mean(0.706, 0.468) = %.4f", overall);
  detail = buf;
  return std::abs(overall - 0.587) <= 1e-12;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, bool pass,
                          const std::string& detail) {
    std::printf("[%s] C%-2d %s — %s\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  std::string d;
  report(1, "gradient oracles", criterion1(d), d);
  report(2, "analytic fixed points", criterion2(d), d);
  report(3, "cca vs generalized eigensolver", criterion3(d), d);
  report(4, "huffman optimality and purity formula", criterion4(d), d);
  report(5, "noise table distribution", criterion5(d), d);

  const auto synth_start = Clock::now();
  SynthFixture fixture;
  std::printf("       synthetic world + joint embeddings ready (%.0fs)\n",
              seconds_since(synth_start));

  report(6, "pretrained init lowers dev perplexity", criterion6(fixture, d), d);
  report(7, "cross-lingual structure", criterion7(fixture, d), d);
  report(8, "biskip reduction to skip-gram", criterion8(d), d);
  report(9, "clustering quality", criterion9(d), d);
  report(10, "determinism and manifest replay", criterion10(d), d);
  report(11, "monolingual purity averaging", criterion11(d), d);

  if (failures == 0) {
    std::printf("all 11 acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
