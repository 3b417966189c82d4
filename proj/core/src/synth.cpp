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

#include "cslm/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {
namespace {

// Arabic-Indic digits keep the surrogate vocabulary inside the Arabic
// script so tag_language sees real Arabic tokens.
std::string arabic_numeral(int value) {
  const char* digits[10] = {"٠", "١", "٢", "٣", "٤",
                            "٥", "٦", "٧", "٨", "٩"};
  std::string out;
  if (value == 0) return digits[0];
  while (value > 0) {
    out = digits[value % 10] + out;
    value /= 10;
  }
  return out;
}

int sample_categorical(const std::vector<double>& cdf, SplitMix64& rng) {
  const double u = rng.next_double();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

}  // namespace

TranslationLexicon SynthWorld::gold_lexicon() const {
  TranslationLexicon lex;
  for (std::size_t i = 0; i < arabic_words.size(); ++i)
    lex.pairs.emplace_back(arabic_words[i], english_words[i]);
  return lex;
}

GoldPartition SynthWorld::gold_partition() const {
  GoldPartition gold;
  const int r = ranks_per_topic();
  for (int t = 0; t < topics; ++t) {
    std::string name = "topic" + std::to_string(t);
    auto& bucket = gold.categories[name];
    for (int k = 0; k < r; ++k) {
      bucket.emplace_back(arabic_words[word_index(t, k)],
                          LanguageTag::kArabic);
      bucket.emplace_back(english_words[word_index(t, k)],
                          LanguageTag::kEnglish);
    }
  }
  return gold;
}

SynthWorld gen_world(int vocab_per_language, int topics, std::uint64_t seed,
                     double switch_prob, int rank_window) {
  if (topics < 1 || vocab_per_language < 1)
    throw std::runtime_error("world needs positive vocabulary and topics");
  if (vocab_per_language % topics != 0)
    throw std::runtime_error("vocabulary size must be divisible by topics");
  if (switch_prob < 0.0 || switch_prob > 1.0)
    throw std::runtime_error("switch_prob must be in [0, 1]");
  SynthWorld w;
  w.vocab_per_language = vocab_per_language;
  w.topics = topics;
  w.switch_prob = switch_prob;
  w.seed = seed;
  const int r = w.ranks_per_topic();
  w.rank_window = std::min(rank_window, r);

  // Zipf over anchor ranks, then the marginal over token ranks is the
  // circular moving average over the rank window.
  std::vector<double> zipf(r);
  double total = 0.0;
  for (int k = 0; k < r; ++k) {
    zipf[k] = 1.0 / (k + 1);
    total += zipf[k];
  }
  for (double& z : zipf) z /= total;
  w.topic_rank_dist.assign(r, 0.0);
  for (int k = 0; k < r; ++k)
    for (int u = 0; u < w.rank_window; ++u)
      w.topic_rank_dist[(k + u) % r] += zipf[k] / w.rank_window;

  for (int t = 0; t < topics; ++t) {
    for (int k = 0; k < r; ++k) {
      const int label = t * 1000 + k;
      w.arabic_words.push_back("ع" + arabic_numeral(label));
      w.english_words.push_back("w" + std::to_string(label));
    }
  }
  return w;
}

SynthCorpus gen_corpus(const SynthWorld& world, int n_mono_ar, int n_mono_en,
                       int n_cs, std::pair<int, int> sentence_len_range,
                       std::uint64_t stream) {
  if (n_mono_ar < 0 || n_mono_en < 0 || n_cs < 0)
    throw std::runtime_error("sentence counts must be >= 0");
  const auto [len_lo, len_hi] = sentence_len_range;
  if (len_lo < 1 || len_hi < len_lo)
    throw std::runtime_error("bad sentence length range");

  const int r = world.ranks_per_topic();
  std::vector<double> zipf_cdf(r);
  {
    double total = 0.0;
    for (int k = 0; k < r; ++k) total += 1.0 / (k + 1);
    double acc = 0.0;
    for (int k = 0; k < r; ++k) {
      acc += (1.0 / (k + 1)) / total;
      zipf_cdf[k] = acc;
    }
    zipf_cdf[r - 1] = 1.0;
  }

  SplitMix64 rng = SplitMix64(world.seed).split(0x5EED + stream);
  SynthCorpus out;
  out.corpus.origin = "synthetic";

  std::unordered_map<std::string, int> arabic_index;
  for (std::size_t i = 0; i < world.arabic_words.size(); ++i)
    arabic_index.emplace(world.arabic_words[i], static_cast<int>(i));

  enum class Mode { kArabic, kEnglish, kSwitched };
  const auto gen_sentence = [&](Mode mode) {
    Sentence s;
    const int topic = static_cast<int>(rng.next_below(world.topics));
    const int anchor = sample_categorical(zipf_cdf, rng);
    const int len =
        len_lo + static_cast<int>(rng.next_below(len_hi - len_lo + 1));
    for (int i = 0; i < len; ++i) {
      const int rank =
          (anchor + static_cast<int>(rng.next_below(world.rank_window))) % r;
      const int w = world.word_index(topic, rank);
      bool english = mode == Mode::kEnglish;
      if (mode == Mode::kSwitched && rng.next_double() < world.switch_prob)
        english = true;
      const std::string& surf =
          english ? world.english_words[w] : world.arabic_words[w];
      s.tokens.push_back(Token{surf, english ? LanguageTag::kEnglish
                                             : LanguageTag::kArabic});
    }
    s.kind = classify_sentence(s);
    return s;
  };

  for (int i = 0; i < n_mono_ar; ++i) {
    Sentence s = gen_sentence(Mode::kArabic);
    // Parallel pair: word-by-word translation with identity alignments.
    AlignedSentencePair p;
    p.src = s;
    for (const auto& tok : s.tokens) {
      const int w = arabic_index.at(tok.surface);
      p.tgt.tokens.push_back(
          Token{world.english_words[w], LanguageTag::kEnglish});
    }
    p.tgt.kind = classify_sentence(p.tgt);
    for (int k = 0; k < static_cast<int>(s.tokens.size()); ++k)
      p.links.emplace_back(k, k);
    out.parallel.push_back(std::move(p));
    out.corpus.sentences.push_back(std::move(s));
  }
  for (int i = 0; i < n_mono_en; ++i)
    out.corpus.sentences.push_back(gen_sentence(Mode::kEnglish));
  for (int i = 0; i < n_cs; ++i)
    out.corpus.sentences.push_back(gen_sentence(Mode::kSwitched));
  return out;
}

}  // namespace cslm
