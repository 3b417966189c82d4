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
//
// cslm: train bilingual word embeddings (cbow, sg, bicvm-add, bicvm-bi,
// bicca-skip, bicca-cbow, biskip, bics-skip, bics-cbow, biccaonbiskip), fit
// an LSTM language model on code-switched text, and evaluate perplexity and
// concept-categorization purity. Every run writes a JSON manifest that can
// be replayed with --manifest for bitwise reproduction.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cslm/bicca.hpp"
#include "cslm/bicvm.hpp"
#include "cslm/biskip.hpp"
#include "cslm/corpus.hpp"
#include "cslm/embed.hpp"
#include "cslm/embedding.hpp"
#include "cslm/evalcat.hpp"
#include "cslm/lm.hpp"
#include "cslm/synth.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::json;
using namespace cslm;

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fnv1a_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for digest");
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001B3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char out[32];
  std::snprintf(out, sizeof(out), "fnv1a:%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

// One manifest per run: subcommand, resolved flags, input digests, outputs,
// wall time.
class ManifestWriter {
 public:
  ManifestWriter(std::string subcommand)
      : start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "cslm";
    doc_["version"] = kVersion;
    doc_["subcommand"] = std::move(subcommand);
    doc_["flags"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::array();
  }

  void flag(const std::string& name, const std::string& value) {
    doc_["flags"][name] = value;
  }
  void flag(const std::string& name, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    doc_["flags"][name] = os.str();
  }
  void flag(const std::string& name, std::int64_t value) {
    doc_["flags"][name] = std::to_string(value);
  }
  void flag_bool(const std::string& name, bool value) {
    doc_["flags"][name] = value ? "true" : "false";
  }
  void input(const std::string& path) {
    if (!path.empty()) doc_["inputs"][path] = fnv1a_digest(path);
  }
  void output(const std::string& path) {
    if (!path.empty()) doc_["outputs"].push_back(path);
  }

  void write(const std::string& path) {
    if (path.empty()) return;
    doc_["wall_time_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest " + path);
    out << doc_.dump(2) << "\n";
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

std::string default_manifest_path(const std::string& manifest_out,
                                  const std::string& out) {
  if (!manifest_out.empty()) return manifest_out;
  if (!out.empty()) return out + ".manifest.json";
  return {};
}

std::ostream& open_sink(const std::string& out, std::ofstream& file) {
  if (out.empty()) return std::cout;
  file.open(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + out);
  return file;
}

// ---------------------------------------------------------------- stats --

struct StatsArgs {
  std::string corpus;
  std::string out;
  std::string manifest_out;
};

int run_stats(const StatsArgs& a) {
  ManifestWriter manifest("stats");
  manifest.flag("corpus", a.corpus);
  manifest.flag("out", a.out);
  manifest.input(a.corpus);

  Corpus c = load_corpus(a.corpus);
  CorpusStats st = corpus_stats(c);
  std::ofstream file;
  std::ostream& os = open_sink(a.out, file);
  os << "sentences_total\t" << st.total_sentences() << "\n"
     << "sentences_mono_arabic\t" << st.sentences_mono_arabic << "\n"
     << "sentences_mono_english\t" << st.sentences_mono_english << "\n"
     << "sentences_code_switched\t" << st.sentences_code_switched << "\n"
     << "sentences_other\t" << st.sentences_other << "\n"
     << "tokens_total\t" << st.total_tokens() << "\n"
     << "tokens_arabic\t" << st.tokens_arabic << "\n"
     << "tokens_english\t" << st.tokens_english << "\n"
     << "tokens_other\t" << st.tokens_other << "\n";
  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// ---------------------------------------------------------- train-embed --

struct TrainEmbedArgs {
  std::string method;
  std::string text;
  std::string parallel_src, parallel_tgt, align;
  std::string lexicon;
  std::string out;
  std::string manifest_out;
  int dim = 200;
  int window = 0;     // 0 = method default
  int negatives = 0;  // 0 = method default
  int epochs = 0;     // 0 = method default
  double lr = 0.0;    // 0 = method default
  int min_count = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  double subsample = 0.0;
  bool use_adagrad = false;
  // bicvm
  int noise = 10;
  int batch = 50;
  double lambda = 1.0;
  double margin = 0.0;
  // biskip
  double cross_weight = 4.0;
  // bicca
  double k_fraction = 0.8;
  double ridge = 1e-8;
  bool scale_correlation = false;
  bool verbose = false;
};

bool method_needs_lexicon(const std::string& m) {
  return m == "bicca-skip" || m == "bicca-cbow" || m == "biccaonbiskip";
}
bool method_needs_alignments(const std::string& m) {
  return m == "biskip" || m == "biccaonbiskip";
}

void validate_method_inputs(const TrainEmbedArgs& a) {
  const bool has_parallel = !a.parallel_src.empty();
  if ((a.parallel_src.empty() != a.parallel_tgt.empty()) ||
      (a.parallel_src.empty() != a.align.empty())) {
    throw UsageError(
        "--parallel-src, --parallel-tgt and --align must be given together");
  }
  if (method_needs_lexicon(a.method) && a.lexicon.empty())
    throw UsageError("method " + a.method + " requires --lexicon");
  if (method_needs_alignments(a.method) && !has_parallel)
    throw UsageError("method " + a.method +
                     " requires --parallel-src/--parallel-tgt/--align");
  if (a.method == "bicvm-add" || a.method == "bicvm-bi") {
    if (a.text.empty() && !has_parallel)
      throw UsageError("method " + a.method +
                       " needs --text or a parallel corpus");
  } else if (a.text.empty()) {
    throw UsageError("method " + a.method + " requires --text");
  }
}

TrainConfig resolved_train_config(const TrainEmbedArgs& a, EmbedModel model,
                                  int def_window, int def_negatives,
                                  int def_epochs, double def_lr) {
  TrainConfig cfg;
  cfg.dim = a.dim;
  cfg.window = a.window > 0 ? a.window : def_window;
  cfg.negatives = a.negatives > 0 ? a.negatives : def_negatives;
  cfg.epochs = a.epochs > 0 ? a.epochs : def_epochs;
  cfg.base_lr = a.lr > 0 ? a.lr : def_lr;
  cfg.min_count = a.min_count;
  cfg.seed = a.seed;
  cfg.model = model;
  cfg.subsample = a.subsample;
  cfg.use_adagrad = a.use_adagrad;
  cfg.threads = a.threads;
  cfg.verbose = a.verbose;
  return cfg;
}

int run_train_embed(const TrainEmbedArgs& a) {
  validate_method_inputs(a);

  ManifestWriter manifest("train-embed");
  manifest.flag("method", a.method);
  manifest.flag("text", a.text);
  manifest.flag("parallel-src", a.parallel_src);
  manifest.flag("parallel-tgt", a.parallel_tgt);
  manifest.flag("align", a.align);
  manifest.flag("lexicon", a.lexicon);
  manifest.flag("out", a.out);
  manifest.input(a.text);
  manifest.input(a.parallel_src);
  manifest.input(a.parallel_tgt);
  manifest.input(a.align);
  manifest.input(a.lexicon);

  Corpus text;
  if (!a.text.empty()) text = load_corpus(a.text);
  std::vector<AlignedSentencePair> parallel;
  if (!a.parallel_src.empty())
    parallel = load_aligned(a.parallel_src, a.parallel_tgt, a.align);
  Corpus parallel_text;
  for (const auto& p : parallel) {
    parallel_text.sentences.push_back(p.src);
    parallel_text.sentences.push_back(p.tgt);
  }
  TranslationLexicon lexicon;
  if (!a.lexicon.empty()) lexicon = load_lexicon(a.lexicon);

  EmbeddingMatrix result;
  const std::string& m = a.method;
  if (m == "cbow" || m == "sg") {
    const EmbedModel model =
        m == "cbow" ? EmbedModel::kCbowNs : EmbedModel::kSkipgramHs;
    TrainConfig cfg = resolved_train_config(a, model, 5, 5, 5, 0.025);
    Corpus all = detail::concat_corpora({&text, &parallel_text}, "train");
    manifest.flag("window", std::int64_t{cfg.window});
    manifest.flag("negatives", std::int64_t{cfg.negatives});
    manifest.flag("epochs", std::int64_t{cfg.epochs});
    manifest.flag("lr", cfg.base_lr);
    result = train_mono(all, cfg);
  } else if (m == "bics-cbow" || m == "bics-skip") {
    const EmbedModel model =
        m == "bics-cbow" ? EmbedModel::kCbowNs : EmbedModel::kSkipgramHs;
    TrainConfig cfg = resolved_train_config(a, model, 5, 5, 5, 0.025);
    Corpus mono_ar = select_sentences(text, {SentenceKind::kMonoArabic});
    Corpus mono_en = select_sentences(text, {SentenceKind::kMonoEnglish});
    Corpus cs = select_sentences(text, {SentenceKind::kCodeSwitched});
    Corpus extra = select_sentences(text, {SentenceKind::kOther});
    extra.sentences.insert(extra.sentences.end(),
                           parallel_text.sentences.begin(),
                           parallel_text.sentences.end());
    manifest.flag("window", std::int64_t{cfg.window});
    manifest.flag("negatives", std::int64_t{cfg.negatives});
    manifest.flag("epochs", std::int64_t{cfg.epochs});
    manifest.flag("lr", cfg.base_lr);
    result = train_bics(mono_ar, mono_en, cs, extra, cfg);
  } else if (m == "bicvm-add" || m == "bicvm-bi") {
    BicvmConfig cfg;
    cfg.dim = a.dim;
    cfg.margin = a.margin;
    cfg.noise_count = a.noise;
    cfg.batch_size = a.batch;
    cfg.l2_lambda = a.lambda;
    cfg.step_size = a.lr > 0 ? a.lr : 0.05;
    cfg.epochs = a.epochs > 0 ? a.epochs : 20;
    cfg.composition =
        m == "bicvm-add" ? Composition::kAdditive : Composition::kBigram;
    cfg.seed = a.seed;
    cfg.verbose = a.verbose;
    manifest.flag("margin", cfg.resolved_margin());
    manifest.flag("noise", std::int64_t{cfg.noise_count});
    manifest.flag("batch", std::int64_t{cfg.batch_size});
    manifest.flag("lambda", cfg.l2_lambda);
    manifest.flag("lr", cfg.step_size);
    manifest.flag("epochs", std::int64_t{cfg.epochs});
    BicvmTables tables = train_bicvm(parallel, text, cfg);
    result = finalize_bicvm(tables);
  } else if (m == "bicca-skip" || m == "bicca-cbow") {
    const EmbedModel model =
        m == "bicca-cbow" ? EmbedModel::kCbowNs : EmbedModel::kSkipgramHs;
    TrainConfig cfg = resolved_train_config(a, model, 5, 5, 5, 0.025);
    BiccaConfig cca;
    cca.k_fraction = a.k_fraction;
    cca.ridge = a.ridge;
    cca.scale_by_correlation = a.scale_correlation;
    manifest.flag("window", std::int64_t{cfg.window});
    manifest.flag("epochs", std::int64_t{cfg.epochs});
    manifest.flag("k-fraction", cca.k_fraction);
    manifest.flag("ridge", cca.ridge);
    result = train_bicca(text, parallel, lexicon, cfg, cca);
  } else if (m == "biskip" || m == "biccaonbiskip") {
    BiskipConfig cfg;
    cfg.dim = a.dim;
    cfg.window = a.window > 0 ? a.window : 10;
    cfg.negatives = a.negatives > 0 ? a.negatives : 30;
    cfg.cross_weight = a.cross_weight;
    cfg.epochs = a.epochs > 0 ? a.epochs : 5;
    cfg.base_lr = a.lr > 0 ? a.lr : 0.025;
    cfg.seed = a.seed;
    cfg.verbose = a.verbose;
    manifest.flag("window", std::int64_t{cfg.window});
    manifest.flag("negatives", std::int64_t{cfg.negatives});
    manifest.flag("cross-weight", cfg.cross_weight);
    manifest.flag("epochs", std::int64_t{cfg.epochs});
    manifest.flag("lr", cfg.base_lr);
    result = train_biskip(parallel, text, cfg);
    if (m == "biccaonbiskip") {
      BiccaConfig cca;
      cca.k_fraction = a.k_fraction;
      cca.ridge = a.ridge;
      cca.scale_by_correlation = a.scale_correlation;
      manifest.flag("k-fraction", cca.k_fraction);
      manifest.flag("ridge", cca.ridge);
      result = bicca_on_biskip(result, lexicon, cca);
    }
  } else {
    throw UsageError("unknown method '" + m + "'");
  }

  manifest.flag("dim", std::int64_t{a.dim});
  manifest.flag("min-count", std::int64_t{a.min_count});
  manifest.flag("seed", static_cast<std::int64_t>(a.seed));
  manifest.flag("threads", std::int64_t{a.threads});
  manifest.flag("subsample", a.subsample);
  manifest.flag_bool("adagrad", a.use_adagrad);
  manifest.flag_bool("scale-correlation", a.scale_correlation);
  save_embeddings_text(result, a.out);
  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// ------------------------------------------------------------- train-lm --

struct TrainLmArgs {
  std::string train, dev;
  std::string embeddings;
  std::string out;
  std::string manifest_out;
  LmConfig cfg;
};

int run_train_lm(const TrainLmArgs& a) {
  ManifestWriter manifest("train-lm");
  manifest.flag("train", a.train);
  manifest.flag("dev", a.dev);
  manifest.flag("embeddings", a.embeddings);
  manifest.flag("out", a.out);
  manifest.flag("dim", std::int64_t{a.cfg.dim});
  manifest.flag("hidden", std::int64_t{a.cfg.hidden});
  manifest.flag("batch", std::int64_t{a.cfg.batch_size});
  manifest.flag("lr", a.cfg.base_lr);
  manifest.flag("max-epochs", std::int64_t{a.cfg.max_epochs});
  manifest.flag("patience", std::int64_t{a.cfg.patience});
  manifest.flag("seed", static_cast<std::int64_t>(a.cfg.seed));
  manifest.flag("clip", a.cfg.clip_norm);
  manifest.input(a.train);
  manifest.input(a.dev);
  manifest.input(a.embeddings);

  Corpus train = load_corpus(a.train);
  Corpus dev = load_corpus(a.dev);
  std::optional<EmbeddingMatrix> pretrained;
  if (!a.embeddings.empty())
    pretrained = load_embeddings_text(a.embeddings);

  LmTrainOutput out =
      train_lm(train, dev, a.cfg, pretrained ? &*pretrained : nullptr);
  save_checkpoint(out.params, a.out);

  std::cout << "epochs\t" << out.history.dev_ppl.size() << "\n"
            << "best_epoch\t" << out.history.best_epoch + 1 << "\n"
            << "best_dev_ppl\t" << out.history.dev_ppl[out.history.best_epoch]
            << "\n";
  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// ------------------------------------------------------------- eval-ppl --

struct EvalPplArgs {
  std::string checkpoint, corpus, out, manifest_out;
};

int run_eval_ppl(const EvalPplArgs& a) {
  ManifestWriter manifest("eval-ppl");
  manifest.flag("checkpoint", a.checkpoint);
  manifest.flag("corpus", a.corpus);
  manifest.flag("out", a.out);
  manifest.input(a.checkpoint);
  manifest.input(a.corpus);

  LstmLmParams params = load_checkpoint(a.checkpoint);
  Corpus eval = load_corpus(a.corpus);
  EvalResult r = perplexity(params, eval);
  std::ofstream file;
  std::ostream& os = open_sink(a.out, file);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", r.perplexity);
  os << "perplexity\t" << buf << "\n"
     << "predicted_tokens\t" << r.token_count << "\n";
  std::snprintf(buf, sizeof(buf), "%.6g", r.oov_rate);
  os << "oov_rate\t" << buf << "\n";
  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// ------------------------------------------------------------- eval-cat --

struct EvalCatArgs {
  std::string embeddings, gold, mode = "all", out, manifest_out;
  std::uint64_t seed = 1;
};

int run_eval_cat(const EvalCatArgs& a) {
  if (a.mode != "ar" && a.mode != "en" && a.mode != "bi" && a.mode != "all")
    throw UsageError("--mode must be one of ar, en, bi, all");

  ManifestWriter manifest("eval-cat");
  manifest.flag("embeddings", a.embeddings);
  manifest.flag("gold", a.gold);
  manifest.flag("mode", a.mode);
  manifest.flag("seed", static_cast<std::int64_t>(a.seed));
  manifest.flag("out", a.out);
  manifest.input(a.embeddings);
  manifest.input(a.gold);

  EmbeddingMatrix emb = load_embeddings_text(a.embeddings);
  GoldPartition gold = load_gold_partition(a.gold);

  std::ofstream file;
  std::ostream& os = open_sink(a.out, file);
  char buf[32];
  const auto row = [&](const std::string& name, double value) {
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    os << name << '\t' << buf << '\n';
  };
  if (a.mode == "ar" || a.mode == "en" || a.mode == "bi") {
    const CatMode mode = a.mode == "ar"   ? CatMode::kArabicOnly
                         : a.mode == "en" ? CatMode::kEnglishOnly
                                          : CatMode::kBilingual;
    CategorizationReport r = run_categorization(emb, gold, mode, a.seed);
    row(cat_mode_name(mode), r.purity);
  } else {
    CategorizationReport ar =
        run_categorization(emb, gold, CatMode::kArabicOnly, a.seed);
    CategorizationReport en =
        run_categorization(emb, gold, CatMode::kEnglishOnly, a.seed);
    CategorizationReport bi =
        run_categorization(emb, gold, CatMode::kBilingual, a.seed);
    row("arabic", ar.purity);
    row("english", en.purity);
    row("monolingual_avg", overall_monolingual(ar.purity, en.purity));
    row("bilingual", bi.purity);
  }
  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// -------------------------------------------------------------------- nn --

struct NnArgs {
  std::string embeddings;
  std::string word;
  int top = 10;
  std::string out, manifest_out;
};

// Nearest neighbors by cosine; with no --word, dumps the top list for every
// vocabulary word (one line per word).
int run_nn(const NnArgs& a) {
  ManifestWriter manifest("nn");
  manifest.flag("embeddings", a.embeddings);
  manifest.flag("word", a.word);
  manifest.flag("top", std::int64_t{a.top});
  manifest.flag("out", a.out);
  manifest.input(a.embeddings);

  EmbeddingMatrix emb = load_embeddings_text(a.embeddings);
  const Vocabulary& v = emb.vocab();
  std::ofstream file;
  std::ostream& os = open_sink(a.out, file);

  const auto dump = [&](int id) {
    std::vector<std::pair<double, int>> scored;
    for (int other = 0; other < v.size(); ++other) {
      if (other == id || v.is_reserved(other)) continue;
      scored.emplace_back(cosine(emb.input_row(id), emb.input_row(other)),
                          other);
    }
    const int keep =
        std::max(0, std::min(a.top, static_cast<int>(scored.size())));
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                      [](const auto& x, const auto& y) {
                        if (x.first != y.first) return x.first > y.first;
                        return x.second < y.second;
                      });
    os << v.word(id);
    char buf[32];
    for (int i = 0; i < keep; ++i) {
      std::snprintf(buf, sizeof(buf), "%.4f", scored[i].first);
      os << '\t' << v.word(scored[i].second) << ' ' << buf;
    }
    os << '\n';
  };

  if (!a.word.empty()) {
    const std::string normalized = normalize_token(a.word);
    auto id = v.lookup(normalized);
    if (!id || v.is_reserved(*id))
      throw std::runtime_error("word '" + normalized +
                               "' is not in the embedding vocabulary");
    dump(*id);
  } else {
    for (int id = 0; id < v.size(); ++id)
      if (!v.is_reserved(id)) dump(id);
  }
  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// ----------------------------------------------------------------- synth --

struct SynthArgs {
  std::string out_dir;
  std::string manifest_out;
  int vocab = 1000;
  int topics = 10;
  int mono_ar = 5000, mono_en = 5000, cs = 1000;
  int lm_mono_ar = 250, lm_mono_en = 150, lm_cs = 600;
  int len_min = 6, len_max = 12;
  double switch_prob = 0.5;
  int rank_window = 2;
  std::uint64_t seed = 1;
};

int run_synth(const SynthArgs& a) {
  ManifestWriter manifest("synth");
  manifest.flag("out-dir", a.out_dir);
  manifest.flag("vocab", std::int64_t{a.vocab});
  manifest.flag("topics", std::int64_t{a.topics});
  manifest.flag("mono-ar", std::int64_t{a.mono_ar});
  manifest.flag("mono-en", std::int64_t{a.mono_en});
  manifest.flag("cs", std::int64_t{a.cs});
  manifest.flag("lm-mono-ar", std::int64_t{a.lm_mono_ar});
  manifest.flag("lm-mono-en", std::int64_t{a.lm_mono_en});
  manifest.flag("lm-cs", std::int64_t{a.lm_cs});
  manifest.flag("len-min", std::int64_t{a.len_min});
  manifest.flag("len-max", std::int64_t{a.len_max});
  manifest.flag("switch-prob", a.switch_prob);
  manifest.flag("rank-window", std::int64_t{a.rank_window});
  manifest.flag("seed", static_cast<std::int64_t>(a.seed));

  SynthWorld world =
      gen_world(a.vocab, a.topics, a.seed, a.switch_prob, a.rank_window);
  SynthCorpus text = gen_corpus(world, a.mono_ar, a.mono_en, a.cs,
                                {a.len_min, a.len_max}, /*stream=*/0);
  SynthCorpus lm = gen_corpus(world, a.lm_mono_ar, a.lm_mono_en, a.lm_cs,
                              {a.len_min, a.len_max}, /*stream=*/1);

  namespace fs = std::filesystem;
  fs::create_directories(a.out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(a.out_dir) / name).string();
  };
  save_corpus(text.corpus, path("text.txt"));
  save_corpus(lm.corpus, path("lm.txt"));
  save_aligned(text.parallel, path("parallel.src.txt"),
               path("parallel.tgt.txt"), path("parallel.align.txt"));
  TranslationLexicon lex = world.gold_lexicon();
  {
    std::ofstream out(path("lexicon.tsv"), std::ios::binary);
    for (const auto& [ar, en] : lex.pairs) out << ar << '\t' << en << '\n';
  }
  save_gold_partition(world.gold_partition(), path("gold.tsv"));

  for (const char* name : {"text.txt", "lm.txt", "parallel.src.txt",
                           "parallel.tgt.txt", "parallel.align.txt",
                           "lexicon.tsv", "gold.tsv"})
    manifest.output(path(name));
  manifest.write(a.manifest_out.empty()
                     ? (fs::path(a.out_dir) / "synth.manifest.json").string()
                     : a.manifest_out);
  return 0;
}

// ------------------------------------------------------------------- exp --

struct ExpArgs {
  int design = 1;
  std::string text, lm_corpus;
  std::string parallel_src, parallel_tgt, align, lexicon;
  std::string methods;  // comma separated; empty = all feasible
  std::string out;
  std::string manifest_out;
  std::string workdir = "exp-work";
  int dim = 200;
  int hidden = 300;
  int embed_epochs = 5;
  int lm_max_epochs = 30;
  int lm_patience = 3;
  double lm_lr = 0.1;
  int lm_batch = 16;
  std::uint64_t seed = 1;
  double train_frac = 0.85, dev_frac = 0.075;
  bool verbose = false;
};

std::vector<std::string> feasible_methods(const ExpArgs& a) {
  std::vector<std::string> methods = {"cbow", "sg", "bics-cbow", "bics-skip",
                                      "bicvm-add", "bicvm-bi"};
  const bool parallel = !a.parallel_src.empty();
  const bool lexicon = !a.lexicon.empty();
  if (lexicon) {
    methods.push_back("bicca-skip");
    methods.push_back("bicca-cbow");
  }
  if (parallel) methods.push_back("biskip");
  if (parallel && lexicon) methods.push_back("biccaonbiskip");
  return methods;
}

int run_exp(const ExpArgs& a) {
  if (a.design != 1 && a.design != 2)
    throw UsageError("--design must be 1 or 2");
  if (a.text.empty() || a.lm_corpus.empty())
    throw UsageError("exp requires --text and --lm-corpus");

  ManifestWriter manifest("exp");
  manifest.flag("design", std::int64_t{a.design});
  manifest.flag("text", a.text);
  manifest.flag("lm-corpus", a.lm_corpus);
  manifest.flag("parallel-src", a.parallel_src);
  manifest.flag("parallel-tgt", a.parallel_tgt);
  manifest.flag("align", a.align);
  manifest.flag("lexicon", a.lexicon);
  manifest.flag("methods", a.methods);
  manifest.flag("out", a.out);
  manifest.flag("workdir", a.workdir);
  manifest.flag("dim", std::int64_t{a.dim});
  manifest.flag("hidden", std::int64_t{a.hidden});
  manifest.flag("embed-epochs", std::int64_t{a.embed_epochs});
  manifest.flag("lm-max-epochs", std::int64_t{a.lm_max_epochs});
  manifest.flag("lm-patience", std::int64_t{a.lm_patience});
  manifest.flag("lm-lr", a.lm_lr);
  manifest.flag("lm-batch", std::int64_t{a.lm_batch});
  manifest.flag("seed", static_cast<std::int64_t>(a.seed));
  manifest.flag("train-frac", a.train_frac);
  manifest.flag("dev-frac", a.dev_frac);
  manifest.input(a.text);
  manifest.input(a.lm_corpus);
  manifest.input(a.parallel_src);
  manifest.input(a.parallel_tgt);
  manifest.input(a.align);
  manifest.input(a.lexicon);

  std::vector<std::string> methods;
  if (a.methods.empty()) {
    methods = feasible_methods(a);
  } else {
    std::istringstream ms(a.methods);
    std::string item;
    while (std::getline(ms, item, ',')) methods.push_back(item);
  }

  // LM corpora per design
  Corpus lm_corpus = load_corpus(a.lm_corpus);
  Corpus text = load_corpus(a.text);
  Corpus lm_train, lm_dev, lm_test;
  if (a.design == 1) {
    const std::size_t n = lm_corpus.sentences.size();
    SplitSizes sizes;
    sizes.train = static_cast<std::size_t>(a.train_frac * n);
    sizes.dev = static_cast<std::size_t>(a.dev_frac * n);
    sizes.test = n - sizes.train - sizes.dev;
    auto parts = split_corpus(lm_corpus, sizes, a.seed);
    lm_train = parts[0];
    lm_dev = parts[1];
    lm_test = parts[2];
  } else {
    // train on the code-switched subset of the text corpus, evaluate on the
    // two halves of the held-out corpus
    lm_train = select_sentences(text, {SentenceKind::kCodeSwitched});
    const std::size_t n = lm_corpus.sentences.size();
    SplitSizes sizes;
    sizes.train = n / 2;
    sizes.dev = n - n / 2;
    sizes.test = 0;
    auto parts = split_corpus(lm_corpus, sizes, a.seed);
    lm_dev = parts[0];
    lm_test = parts[1];
  }

  namespace fs = std::filesystem;
  fs::create_directories(a.workdir);

  LmConfig lm_cfg;
  lm_cfg.dim = a.dim;
  lm_cfg.hidden = a.hidden;
  lm_cfg.batch_size = a.lm_batch;
  lm_cfg.base_lr = a.lm_lr;
  lm_cfg.max_epochs = a.lm_max_epochs;
  lm_cfg.patience = a.lm_patience;
  lm_cfg.seed = a.seed;
  lm_cfg.verbose = a.verbose;

  std::ofstream file;
  std::ostream& os = open_sink(a.out, file);
  os << "method\tdev_ppl\ttest_ppl\n";
  char buf[64];
  const auto emit = [&](const std::string& name, double dev, double test) {
    std::snprintf(buf, sizeof(buf), "%.6g\t%.6g", dev, test);
    os << name << '\t' << buf << '\n';
    os.flush();
  };

  // baseline: random initialization
  {
    LmTrainOutput out = train_lm(lm_train, lm_dev, lm_cfg);
    emit("baseline", perplexity(out.params, lm_dev).perplexity,
         perplexity(out.params, lm_test).perplexity);
  }

  for (const std::string& method : methods) {
    TrainEmbedArgs ea;
    ea.method = method;
    ea.text = a.text;
    ea.parallel_src = a.parallel_src;
    ea.parallel_tgt = a.parallel_tgt;
    ea.align = a.align;
    ea.lexicon = a.lexicon;
    ea.dim = a.dim;
    ea.epochs = a.embed_epochs;
    ea.seed = a.seed;
    ea.verbose = a.verbose;
    ea.out = (fs::path(a.workdir) / (method + ".emb.txt")).string();
    ea.manifest_out = ea.out + ".manifest.json";
    run_train_embed(ea);

    EmbeddingMatrix emb = load_embeddings_text(ea.out);
    // projection-based methods emit ceil(k_fraction * dim) dimensions;
    // the embedding layer follows the file
    LmConfig method_cfg = lm_cfg;
    method_cfg.dim = emb.dim();
    LmTrainOutput out = train_lm(lm_train, lm_dev, method_cfg, &emb);
    emit(method, perplexity(out.params, lm_dev).perplexity,
         perplexity(out.params, lm_test).perplexity);
  }

  manifest.output(a.out);
  manifest.write(default_manifest_path(a.manifest_out, a.out));
  return 0;
}

// ------------------------------------------------------------ replaying --

int dispatch(std::vector<std::string> args);

int run_replay(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path);
  json doc = json::parse(in);
  if (!doc.contains("subcommand") || !doc.contains("flags"))
    throw std::runtime_error(manifest_path + " is not a cslm manifest");

  // refuse to "reproduce" from changed inputs
  if (doc.contains("inputs")) {
    for (auto& [path, digest] : doc["inputs"].items()) {
      const std::string now = fnv1a_digest(path);
      if (now != digest.get<std::string>())
        throw std::runtime_error("input " + path +
                                 " changed since the manifest was written");
    }
  }

  std::vector<std::string> args;
  args.push_back(doc["subcommand"].get<std::string>());
  for (auto& [key, value] : doc["flags"].items()) {
    const std::string v = value.get<std::string>();
    if (v.empty() || v == "false") continue;
    if (v == "true") {
      args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(v);
    }
  }
  return dispatch(std::move(args));
}

// ----------------------------------------------------------------- main --

int dispatch(std::vector<std::string> args) {
  CLI::App app{"bilingual word embeddings and code-switching language models"};
  app.require_subcommand(1);

  StatsArgs stats;
  auto* cmd_stats = app.add_subcommand("stats", "corpus statistics");
  cmd_stats->add_option("corpus", stats.corpus, "corpus file")->required();
  cmd_stats->add_option("--out", stats.out, "write the table here");
  cmd_stats->add_option("--manifest-out", stats.manifest_out);

  TrainEmbedArgs te;
  auto* cmd_te = app.add_subcommand("train-embed", "train bilingual embeddings");
  cmd_te->add_option("--method", te.method)
      ->required()
      ->check(CLI::IsMember({"cbow", "sg", "bicvm-add", "bicvm-bi",
                             "bicca-skip", "bicca-cbow", "biskip", "bics-skip",
                             "bics-cbow", "biccaonbiskip"}));
  cmd_te->add_option("--text", te.text, "text corpus");
  cmd_te->add_option("--parallel-src", te.parallel_src);
  cmd_te->add_option("--parallel-tgt", te.parallel_tgt);
  cmd_te->add_option("--align", te.align);
  cmd_te->add_option("--lexicon", te.lexicon);
  cmd_te->add_option("--out", te.out)->required();
  cmd_te->add_option("--manifest-out", te.manifest_out);
  cmd_te->add_option("--dim", te.dim);
  cmd_te->add_option("--window", te.window, "0 = method default");
  cmd_te->add_option("--negatives", te.negatives, "0 = method default");
  cmd_te->add_option("--epochs", te.epochs, "0 = method default");
  cmd_te->add_option("--lr", te.lr, "0 = method default");
  cmd_te->add_option("--min-count", te.min_count);
  cmd_te->add_option("--seed", te.seed);
  cmd_te->add_option("--threads", te.threads);
  cmd_te->add_option("--subsample", te.subsample);
  cmd_te->add_flag("--adagrad", te.use_adagrad,
                   "adaptive per-parameter steps instead of scheduled-lr SGD");
  cmd_te->add_option("--noise", te.noise, "bicvm noise sentences");
  cmd_te->add_option("--batch", te.batch, "bicvm batch size");
  cmd_te->add_option("--lambda", te.lambda, "bicvm L2 strength");
  cmd_te->add_option("--margin", te.margin, "bicvm margin, 0 = dim");
  cmd_te->add_option("--cross-weight", te.cross_weight,
                     "biskip cross-lingual gradient weight");
  cmd_te->add_option("--k-fraction", te.k_fraction, "cca component fraction");
  cmd_te->add_option("--ridge", te.ridge, "cca covariance ridge");
  cmd_te->add_flag("--scale-correlation", te.scale_correlation,
                   "scale projected components by their correlations");
  cmd_te->add_flag("--verbose", te.verbose);

  TrainLmArgs tl;
  auto* cmd_tl = app.add_subcommand("train-lm", "train the LSTM language model");
  cmd_tl->add_option("--train", tl.train)->required();
  cmd_tl->add_option("--dev", tl.dev)->required();
  cmd_tl->add_option("--embeddings", tl.embeddings,
                     "pretrained embedding text file");
  cmd_tl->add_option("--out", tl.out)->required();
  cmd_tl->add_option("--manifest-out", tl.manifest_out);
  cmd_tl->add_option("--dim", tl.cfg.dim);
  cmd_tl->add_option("--hidden", tl.cfg.hidden);
  cmd_tl->add_option("--batch", tl.cfg.batch_size);
  cmd_tl->add_option("--lr", tl.cfg.base_lr);
  cmd_tl->add_option("--max-epochs", tl.cfg.max_epochs);
  cmd_tl->add_option("--patience", tl.cfg.patience);
  cmd_tl->add_option("--seed", tl.cfg.seed);
  cmd_tl->add_option("--clip", tl.cfg.clip_norm);
  cmd_tl->add_flag("--verbose", tl.cfg.verbose);

  EvalPplArgs ep;
  auto* cmd_ep = app.add_subcommand("eval-ppl", "perplexity of a checkpoint");
  cmd_ep->add_option("--checkpoint", ep.checkpoint)->required();
  cmd_ep->add_option("--corpus", ep.corpus)->required();
  cmd_ep->add_option("--out", ep.out);
  cmd_ep->add_option("--manifest-out", ep.manifest_out);

  EvalCatArgs ec;
  auto* cmd_ec = app.add_subcommand("eval-cat", "concept categorization purity");
  cmd_ec->add_option("--embeddings", ec.embeddings)->required();
  cmd_ec->add_option("--gold", ec.gold)->required();
  cmd_ec->add_option("--mode", ec.mode, "ar, en, bi or all");
  cmd_ec->add_option("--seed", ec.seed);
  cmd_ec->add_option("--out", ec.out);
  cmd_ec->add_option("--manifest-out", ec.manifest_out);

  NnArgs nn;
  auto* cmd_nn = app.add_subcommand("nn", "nearest neighbors by cosine");
  cmd_nn->add_option("--embeddings", nn.embeddings)->required();
  cmd_nn->add_option("--word", nn.word, "single query; default dumps all");
  cmd_nn->add_option("--top", nn.top);
  cmd_nn->add_option("--out", nn.out);
  cmd_nn->add_option("--manifest-out", nn.manifest_out);

  SynthArgs sy;
  auto* cmd_sy = app.add_subcommand("synth", "generate a synthetic world");
  cmd_sy->add_option("--out-dir", sy.out_dir)->required();
  cmd_sy->add_option("--manifest-out", sy.manifest_out);
  cmd_sy->add_option("--vocab", sy.vocab, "words per language");
  cmd_sy->add_option("--topics", sy.topics);
  cmd_sy->add_option("--mono-ar", sy.mono_ar);
  cmd_sy->add_option("--mono-en", sy.mono_en);
  cmd_sy->add_option("--cs", sy.cs);
  cmd_sy->add_option("--lm-mono-ar", sy.lm_mono_ar);
  cmd_sy->add_option("--lm-mono-en", sy.lm_mono_en);
  cmd_sy->add_option("--lm-cs", sy.lm_cs);
  cmd_sy->add_option("--len-min", sy.len_min);
  cmd_sy->add_option("--len-max", sy.len_max);
  cmd_sy->add_option("--switch-prob", sy.switch_prob);
  cmd_sy->add_option("--rank-window", sy.rank_window);
  cmd_sy->add_option("--seed", sy.seed);

  ExpArgs ex;
  auto* cmd_ex = app.add_subcommand("exp", "run a full experiment table");
  cmd_ex->add_option("--design", ex.design, "1 or 2");
  cmd_ex->add_option("--text", ex.text)->required();
  cmd_ex->add_option("--lm-corpus", ex.lm_corpus)->required();
  cmd_ex->add_option("--parallel-src", ex.parallel_src);
  cmd_ex->add_option("--parallel-tgt", ex.parallel_tgt);
  cmd_ex->add_option("--align", ex.align);
  cmd_ex->add_option("--lexicon", ex.lexicon);
  cmd_ex->add_option("--methods", ex.methods, "comma separated; empty = all");
  cmd_ex->add_option("--out", ex.out);
  cmd_ex->add_option("--manifest-out", ex.manifest_out);
  cmd_ex->add_option("--workdir", ex.workdir);
  cmd_ex->add_option("--dim", ex.dim);
  cmd_ex->add_option("--hidden", ex.hidden);
  cmd_ex->add_option("--embed-epochs", ex.embed_epochs);
  cmd_ex->add_option("--lm-max-epochs", ex.lm_max_epochs);
  cmd_ex->add_option("--lm-patience", ex.lm_patience);
  cmd_ex->add_option("--lm-lr", ex.lm_lr);
  cmd_ex->add_option("--lm-batch", ex.lm_batch);
  cmd_ex->add_option("--seed", ex.seed);
  cmd_ex->add_option("--train-frac", ex.train_frac);
  cmd_ex->add_option("--dev-frac", ex.dev_frac);
  cmd_ex->add_flag("--verbose", ex.verbose);

  std::vector<const char*> argv;
  argv.push_back("cslm");
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_stats->parsed()) return run_stats(stats);
  if (cmd_te->parsed()) return run_train_embed(te);
  if (cmd_tl->parsed()) return run_train_lm(tl);
  if (cmd_ep->parsed()) return run_eval_ppl(ep);
  if (cmd_ec->parsed()) return run_eval_cat(ec);
  if (cmd_nn->parsed()) return run_nn(nn);
  if (cmd_sy->parsed()) return run_synth(sy);
  if (cmd_ex->parsed()) return run_exp(ex);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // top-level replay flag: `cslm --manifest run.manifest.json`
    if (args.size() == 2 && args[0] == "--manifest") return run_replay(args[1]);
    return dispatch(std::move(args));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
