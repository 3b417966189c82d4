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

#include "cslm/lm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {
namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// One time step of activations for a batch.
struct StepCache {
  Eigen::MatrixXd x;      // B x d gathered inputs
  Eigen::MatrixXd i, f, g, o;  // B x h gate activations
  Eigen::MatrixXd c, tanh_c, h;
  Eigen::MatrixXd probs;  // B x |V|
  std::vector<int> input_ids;
};

struct BatchLayout {
  std::vector<std::vector<int>> inputs;   // T x B
  std::vector<std::vector<int>> targets;  // T x B, -1 = masked
  int steps = 0;
  int batch = 0;
  std::int64_t predicted = 0;
};

// Frames each sequence as <s> w1..wn with targets w1..wn </s> and pads to
// the longest sequence. Padded positions use the <s> id as a harmless
// input and a masked target.
BatchLayout layout_batch(const std::vector<std::vector<int>>& batch,
                         const Vocabulary& vocab) {
  BatchLayout out;
  out.batch = static_cast<int>(batch.size());
  for (const auto& seq : batch)
    out.steps = std::max(out.steps, static_cast<int>(seq.size()) + 1);
  out.inputs.assign(out.steps, std::vector<int>(out.batch, vocab.start_id()));
  out.targets.assign(out.steps, std::vector<int>(out.batch, -1));
  for (int b = 0; b < out.batch; ++b) {
    const auto& seq = batch[b];
    const int n = static_cast<int>(seq.size());
    for (int t = 0; t <= n; ++t) {
      out.inputs[t][b] = t == 0 ? vocab.start_id() : seq[t - 1];
      out.targets[t][b] = t == n ? vocab.end_id() : seq[t];
    }
    out.predicted += n + 1;
  }
  return out;
}

Eigen::MatrixXd gather_embeddings(const LstmLmParams& p,
                                  const std::vector<int>& ids) {
  Eigen::MatrixXd x(ids.size(), p.dim);
  for (std::size_t b = 0; b < ids.size(); ++b) x.row(b) = p.embedding.row(ids[b]);
  return x;
}

// Forward over the whole batch, optionally collecting caches for BPTT and
// accumulating the summed negative log likelihood of unmasked targets.
double forward_pass(const LstmLmParams& p, const BatchLayout& lay,
                    std::vector<StepCache>* caches, double* total_nll) {
  const int h = p.hidden;
  const int batch = lay.batch;
  Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(batch, h);
  Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(batch, h);
  double nll = 0.0;
  for (int t = 0; t < lay.steps; ++t) {
    StepCache step;
    step.input_ids = lay.inputs[t];
    step.x = gather_embeddings(p, lay.inputs[t]);
    Eigen::MatrixXd z = step.x * p.w_input + h_prev * p.w_recurrent;
    z.rowwise() += p.bias.transpose();
    step.i = sigmoid(z.middleCols(0, h));
    step.f = sigmoid(z.middleCols(h, h));
    step.g = z.middleCols(2 * h, h).array().tanh();
    step.o = sigmoid(z.middleCols(3 * h, h));
    step.c = step.f.cwiseProduct(c_prev) + step.i.cwiseProduct(step.g);
    step.tanh_c = step.c.array().tanh();
    step.h = step.o.cwiseProduct(step.tanh_c);

    Eigen::MatrixXd logits = step.h * p.w_output;
    logits.rowwise() += p.b_output.transpose();
    step.probs.resize(batch, p.vocab_size());
    for (int b = 0; b < batch; ++b) {
      const double m = logits.row(b).maxCoeff();
      Eigen::ArrayXd e = (logits.row(b).array() - m).exp();
      step.probs.row(b) = (e / e.sum()).matrix();
      const int target = lay.targets[t][b];
      if (target >= 0) nll += -std::log(step.probs(b, target));
    }
    h_prev = step.h;
    c_prev = step.c;
    if (caches) caches->push_back(std::move(step));
  }
  if (total_nll) *total_nll = nll;
  return nll;
}

void adagrad_tensor(Eigen::Ref<Eigen::MatrixXd> param,
                    const Eigen::MatrixXd& grad, Eigen::MatrixXd& acc,
                    double lr, double eps) {
  acc.array() += grad.array().square();
  param.array() -= lr * grad.array() / (acc.array().sqrt() + eps);
}

void adagrad_vector(Eigen::Ref<Eigen::VectorXd> param,
                    const Eigen::VectorXd& grad, Eigen::VectorXd& acc,
                    double lr, double eps) {
  acc.array() += grad.array().square();
  param.array() -= lr * grad.array() / (acc.array().sqrt() + eps);
}

void write_tensor(std::ostream& out, const std::string& name,
                  const Eigen::MatrixXd& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), c ? " %.9g" : "%.9g", m(r, c));
      out << buf;
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_tensor(std::istream& in, const std::string& expect,
                            const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": missing tensor " + expect);
  std::istringstream hs(line);
  std::string kw, name;
  long rows = 0, cols = 0;
  if (!(hs >> kw >> name >> rows >> cols) || kw != "tensor" || name != expect)
    throw std::runtime_error(path + ": expected tensor " + expect + ", got '" +
                             line + "'");
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated tensor " + expect);
    std::istringstream ls(line);
    for (long c = 0; c < cols; ++c) {
      if (!(ls >> m(r, c)))
        throw std::runtime_error(path + ": bad row in tensor " + expect);
    }
  }
  return m;
}

}  // namespace

void LmGradients::zero_like(const LstmLmParams& p) {
  embedding = Eigen::MatrixXd::Zero(p.embedding.rows(), p.embedding.cols());
  w_input = Eigen::MatrixXd::Zero(p.w_input.rows(), p.w_input.cols());
  w_recurrent =
      Eigen::MatrixXd::Zero(p.w_recurrent.rows(), p.w_recurrent.cols());
  w_output = Eigen::MatrixXd::Zero(p.w_output.rows(), p.w_output.cols());
  bias = Eigen::VectorXd::Zero(p.bias.size());
  b_output = Eigen::VectorXd::Zero(p.b_output.size());
}

double LmGradients::squared_norm() const {
  return embedding.squaredNorm() + w_input.squaredNorm() +
         w_recurrent.squaredNorm() + w_output.squaredNorm() +
         bias.squaredNorm() + b_output.squaredNorm();
}

void LmGradients::scale(double s) {
  embedding *= s;
  w_input *= s;
  w_recurrent *= s;
  w_output *= s;
  bias *= s;
  b_output *= s;
}

LstmLmParams init_lm_params(const Vocabulary& vocab, const LmConfig& cfg) {
  LstmLmParams p;
  p.vocab = vocab;
  p.dim = cfg.dim;
  p.hidden = cfg.hidden;
  const int v = vocab.size();
  const int h = cfg.hidden;

  // The embedding stream is exactly the init_embeddings stream; every other
  // tensor draws from its own split so pretrained initialization perturbs
  // nothing but embedding rows.
  SplitMix64 master(cfg.seed);
  p.embedding.resize(v, cfg.dim);
  {
    SplitMix64 rng(cfg.seed);
    const double half = 0.5 / cfg.dim;
    for (int r = 0; r < v; ++r)
      for (int c = 0; c < cfg.dim; ++c)
        p.embedding(r, c) = rng.uniform(-half, half);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  const auto fill = [&](Eigen::MatrixXd& m, long rows, long cols,
                        std::uint64_t stream) {
    SplitMix64 rng = master.split(stream);
    m.resize(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  };
  fill(p.w_input, cfg.dim, 4 * h, 1);
  fill(p.w_recurrent, h, 4 * h, 2);
  {
    SplitMix64 rng = master.split(3);
    p.bias.resize(4 * h);
    for (int i = 0; i < 4 * h; ++i) p.bias[i] = rng.uniform(-bound, bound);
    p.bias.segment(h, h).setConstant(1.0);  // forget gate
  }
  fill(p.w_output, h, v, 4);
  {
    SplitMix64 rng = master.split(5);
    p.b_output.resize(v);
    for (int i = 0; i < v; ++i) p.b_output[i] = rng.uniform(-bound, bound);
  }
  return p;
}

int init_embedding_layer(LstmLmParams& params,
                         const EmbeddingMatrix& pretrained) {
  if (pretrained.dim() != params.dim)
    throw std::runtime_error(
        "pretrained dimension " + std::to_string(pretrained.dim()) +
        " does not match LM embedding dimension " + std::to_string(params.dim));
  int copied = 0;
  for (int id = 0; id < params.vocab.size(); ++id) {
    if (params.vocab.is_reserved(id)) continue;
    auto src = pretrained.vocab().lookup(params.vocab.word(id));
    if (!src || pretrained.vocab().is_reserved(*src)) continue;
    auto row = pretrained.input_row(*src);
    for (int c = 0; c < params.dim; ++c) params.embedding(id, c) = row[c];
    ++copied;
  }
  return copied;
}

std::vector<int> sentence_to_ids(const Sentence& s, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(s.tokens.size());
  for (const auto& t : s.tokens) ids.push_back(vocab.id_or_unk(t.surface));
  return ids;
}

Eigen::MatrixXd lstm_forward(const LstmLmParams& params,
                             const std::vector<int>& ids) {
  for (int id : ids)
    if (id < 0 || id >= params.vocab_size())
      throw std::runtime_error("id out of vocabulary range");
  BatchLayout lay;
  lay.batch = 1;
  lay.steps = static_cast<int>(ids.size());
  lay.inputs.assign(lay.steps, std::vector<int>(1));
  lay.targets.assign(lay.steps, std::vector<int>(1, -1));
  for (int t = 0; t < lay.steps; ++t) lay.inputs[t][0] = ids[t];
  std::vector<StepCache> caches;
  forward_pass(params, lay, &caches, nullptr);
  Eigen::MatrixXd probs(lay.steps, params.vocab_size());
  for (int t = 0; t < lay.steps; ++t) probs.row(t) = caches[t].probs.row(0);
  return probs;
}

double lm_loss_and_grads(const LstmLmParams& params,
                         const std::vector<std::vector<int>>& batch,
                         LmGradients& grads, double clip_norm,
                         int batch_index) {
  if (batch.empty()) throw std::runtime_error("empty batch");
  const BatchLayout lay = layout_batch(batch, params.vocab);
  std::vector<StepCache> caches;
  caches.reserve(lay.steps);
  double total_nll = 0.0;
  forward_pass(params, lay, &caches, &total_nll);
  const double inv_n = 1.0 / static_cast<double>(lay.predicted);
  const double loss = total_nll * inv_n;
  if (!std::isfinite(loss)) {
    throw std::runtime_error("non-finite loss in batch " +
                             std::to_string(batch_index));
  }

  grads.zero_like(params);
  const int h = params.hidden;
  const int b_n = lay.batch;
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(b_n, h);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(b_n, h);
  for (int t = lay.steps - 1; t >= 0; --t) {
    const StepCache& step = caches[t];
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(b_n, params.vocab_size());
    for (int b = 0; b < b_n; ++b) {
      const int target = lay.targets[t][b];
      if (target < 0) continue;
      dlogits.row(b) = step.probs.row(b) * inv_n;
      dlogits(b, target) -= inv_n;
    }
    grads.w_output.noalias() += step.h.transpose() * dlogits;
    grads.b_output.noalias() += dlogits.colwise().sum().transpose();

    Eigen::MatrixXd dh = dlogits * params.w_output.transpose() + dh_next;
    const Eigen::MatrixXd do_ = dh.cwiseProduct(step.tanh_c);
    Eigen::MatrixXd dc =
        dh.cwiseProduct(step.o)
            .cwiseProduct((1.0 - step.tanh_c.array().square()).matrix()) +
        dc_next;
    const Eigen::MatrixXd di = dc.cwiseProduct(step.g);
    const Eigen::MatrixXd dg = dc.cwiseProduct(step.i);
    Eigen::MatrixXd df;
    if (t > 0) {
      df = dc.cwiseProduct(caches[t - 1].c);
      dc_next = dc.cwiseProduct(step.f);
    } else {
      df = Eigen::MatrixXd::Zero(b_n, h);  // initial cell state is zero
      dc_next = Eigen::MatrixXd::Zero(b_n, h);
    }

    Eigen::MatrixXd dz(b_n, 4 * h);
    dz.middleCols(0, h) =
        di.cwiseProduct(step.i).cwiseProduct((1.0 - step.i.array()).matrix());
    dz.middleCols(h, h) =
        df.cwiseProduct(step.f).cwiseProduct((1.0 - step.f.array()).matrix());
    dz.middleCols(2 * h, h) =
        dg.cwiseProduct((1.0 - step.g.array().square()).matrix());
    dz.middleCols(3 * h, h) =
        do_.cwiseProduct(step.o).cwiseProduct((1.0 - step.o.array()).matrix());

    grads.w_input.noalias() += step.x.transpose() * dz;
    if (t > 0)
      grads.w_recurrent.noalias() += caches[t - 1].h.transpose() * dz;
    grads.bias.noalias() += dz.colwise().sum().transpose();

    const Eigen::MatrixXd dx = dz * params.w_input.transpose();
    for (int b = 0; b < b_n; ++b)
      grads.embedding.row(step.input_ids[b]) += dx.row(b);
    dh_next = dz * params.w_recurrent.transpose();
  }

  if (clip_norm > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > clip_norm) grads.scale(clip_norm / norm);
  }
  return loss;
}

LmTrainOutput train_lm(const Corpus& train, const Corpus& dev,
                       const LmConfig& cfg, const EmbeddingMatrix* pretrained) {
  if (train.sentences.empty())
    throw std::runtime_error("training corpus is empty");
  Vocabulary vocab = build_vocabulary(train, /*min_count=*/1);
  LstmLmParams params = init_lm_params(vocab, cfg);
  if (pretrained) init_embedding_layer(params, *pretrained);

  std::vector<std::vector<int>> sequences;
  sequences.reserve(train.sentences.size());
  for (const auto& s : train.sentences)
    sequences.push_back(sentence_to_ids(s, vocab));

  struct AdaState {
    Eigen::MatrixXd embedding, w_input, w_recurrent, w_output;
    Eigen::VectorXd bias, b_output;
  } acc;
  acc.embedding = Eigen::MatrixXd::Zero(params.embedding.rows(), params.dim);
  acc.w_input = Eigen::MatrixXd::Zero(params.dim, 4 * params.hidden);
  acc.w_recurrent =
      Eigen::MatrixXd::Zero(params.hidden, 4 * params.hidden);
  acc.w_output = Eigen::MatrixXd::Zero(params.hidden, params.vocab_size());
  acc.bias = Eigen::VectorXd::Zero(4 * params.hidden);
  acc.b_output = Eigen::VectorXd::Zero(params.vocab_size());

  SplitMix64 shuffle_rng = SplitMix64(cfg.seed).split(6);
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);

  LmTrainOutput out;
  out.params = params;
  double best_ppl = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  const double eps = 1e-8;
  LmGradients grads;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    double epoch_loss = 0.0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + cfg.batch_size);
      std::vector<std::vector<int>> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k)
        batch.push_back(sequences[order[k]]);
      epoch_loss += lm_loss_and_grads(params, batch, grads, cfg.clip_norm,
                                      static_cast<int>(batches));
      ++batches;
      adagrad_tensor(params.embedding, grads.embedding, acc.embedding,
                     cfg.base_lr, eps);
      adagrad_tensor(params.w_input, grads.w_input, acc.w_input, cfg.base_lr,
                     eps);
      adagrad_tensor(params.w_recurrent, grads.w_recurrent, acc.w_recurrent,
                     cfg.base_lr, eps);
      adagrad_tensor(params.w_output, grads.w_output, acc.w_output,
                     cfg.base_lr, eps);
      adagrad_vector(params.bias, grads.bias, acc.bias, cfg.base_lr, eps);
      adagrad_vector(params.b_output, grads.b_output, acc.b_output,
                     cfg.base_lr, eps);
    }
    out.history.train_loss.push_back(epoch_loss / std::max<std::int64_t>(
                                                       batches, 1));
    const EvalResult dev_result = perplexity(params, dev);
    out.history.dev_ppl.push_back(dev_result.perplexity);
    if (cfg.verbose) {
      std::cerr << "lm epoch " << epoch + 1 << " train xent "
                << out.history.train_loss.back() << " dev ppl "
                << dev_result.perplexity << "\n";
    }
    if (dev_result.perplexity < best_ppl) {
      best_ppl = dev_result.perplexity;
      out.params = params;
      out.history.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }
  return out;
}

EvalResult perplexity(const LstmLmParams& params, const Corpus& eval_corpus) {
  double total_nll = 0.0;
  std::int64_t predicted = 0;
  std::int64_t oov = 0, tokens = 0;
  for (const auto& s : eval_corpus.sentences) {
    std::vector<int> ids = sentence_to_ids(s, params.vocab);
    tokens += ids.size();
    for (int id : ids)
      if (id == params.vocab.unk_id()) ++oov;
    const BatchLayout lay = layout_batch({ids}, params.vocab);
    double nll = 0.0;
    forward_pass(params, lay, nullptr, &nll);
    total_nll += nll;
    predicted += lay.predicted;
  }
  EvalResult r;
  r.token_count = predicted;
  r.perplexity =
      predicted > 0 ? std::exp(total_nll / static_cast<double>(predicted))
                    : 0.0;
  r.oov_rate = tokens > 0 ? static_cast<double>(oov) / tokens : 0.0;
  return r;
}

void save_checkpoint(const LstmLmParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << "cslm-lm-checkpoint 1\n";
  out << "dim " << params.dim << '\n';
  out << "hidden " << params.hidden << '\n';
  out << "vocab " << params.vocab.size() << '\n';
  for (int id = 0; id < params.vocab.size(); ++id)
    out << params.vocab.word(id) << ' ' << params.vocab.count(id) << '\n';
  write_tensor(out, "embedding", params.embedding);
  write_tensor(out, "w_input", params.w_input);
  write_tensor(out, "w_recurrent", params.w_recurrent);
  write_tensor(out, "bias", params.bias.transpose());
  write_tensor(out, "w_output", params.w_output);
  write_tensor(out, "b_output", params.b_output.transpose());
}

LstmLmParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line) || line != "cslm-lm-checkpoint 1")
    throw std::runtime_error(path + ": not a cslm checkpoint");
  LstmLmParams p;
  int vocab_size = 0;
  for (const char* key : {"dim", "hidden", "vocab"}) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated header");
    std::istringstream ls(line);
    std::string k;
    int value = 0;
    if (!(ls >> k >> value) || k != key)
      throw std::runtime_error(path + ": expected '" + key + "', got '" +
                               line + "'");
    if (k == "dim") p.dim = value;
    if (k == "hidden") p.hidden = value;
    if (k == "vocab") vocab_size = value;
  }
  for (int id = 0; id < vocab_size; ++id) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated vocabulary");
    std::istringstream ls(line);
    std::string word;
    std::int64_t count = 0;
    if (!(ls >> word >> count))
      throw std::runtime_error(path + ": bad vocabulary line '" + line + "'");
    p.vocab.add(word, count);
  }
  p.embedding = read_tensor(in, "embedding", path);
  p.w_input = read_tensor(in, "w_input", path);
  p.w_recurrent = read_tensor(in, "w_recurrent", path);
  p.bias = read_tensor(in, "bias", path).row(0).transpose();
  p.w_output = read_tensor(in, "w_output", path);
  p.b_output = read_tensor(in, "b_output", path).row(0).transpose();
  if (p.embedding.rows() != vocab_size || p.embedding.cols() != p.dim ||
      p.w_output.cols() != vocab_size)
    throw std::runtime_error(path + ": tensor shapes disagree with header");
  return p;
}

}  // namespace cslm
