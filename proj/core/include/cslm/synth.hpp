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

#ifndef CSLM_SYNTH_HPP_
#define CSLM_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cslm/corpus.hpp"

namespace cslm {

// A synthetic bilingual world: T topics of V/T ranked words per language, a
// rank-preserving bijective translation map between the two languages, and a
// heavy-tailed per-topic word distribution. Sentences stay near one rank
// neighborhood so individual words keep distinguishable contexts, which is
// what makes translation retrieval measurable at all.
struct SynthWorld {
  int vocab_per_language = 0;
  int topics = 0;
  double switch_prob = 0.5;   // per-token flip probability in CS sentences
  int rank_window = 2;        // width of the rank neighborhood per sentence
  std::uint64_t seed = 0;

  // marginal distribution over the ranks of one topic (same for all topics)
  std::vector<double> topic_rank_dist;

  // surfaces indexed topic * ranks_per_topic() + rank
  std::vector<std::string> arabic_words;
  std::vector<std::string> english_words;

  int ranks_per_topic() const { return vocab_per_language / topics; }

  // word index of (topic, rank)
  int word_index(int topic, int rank) const {
    return topic * ranks_per_topic() + rank;
  }

  TranslationLexicon gold_lexicon() const;
  GoldPartition gold_partition() const;
};

// Deterministic per seed. vocab_per_language must be divisible by topics.
SynthWorld gen_world(int vocab_per_language, int topics, std::uint64_t seed,
                     double switch_prob = 0.5, int rank_window = 2);

struct SynthCorpus {
  Corpus corpus;
  std::vector<AlignedSentencePair> parallel;  // per mono-Arabic sentence
};

// Samples sentences: each picks a topic and an anchor rank from a Zipf
// distribution, then draws tokens from the anchor's rank neighborhood.
// Code-switched sentences start Arabic and flip tokens to their English
// translations with probability switch_prob. Every mono-Arabic sentence
// also yields a parallel pair (word-by-word translation, identity links).
// `stream` selects an independent deterministic corpus from the same world.
SynthCorpus gen_corpus(const SynthWorld& world, int n_mono_ar, int n_mono_en,
                       int n_cs, std::pair<int, int> sentence_len_range,
                       std::uint64_t stream = 0);

}  // namespace cslm

#endif  // CSLM_SYNTH_HPP_
