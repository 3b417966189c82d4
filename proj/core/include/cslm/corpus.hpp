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

#ifndef CSLM_CORPUS_HPP_
#define CSLM_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cslm {

enum class LanguageTag { kArabic, kEnglish, kOther };

enum class SentenceKind { kMonoArabic, kMonoEnglish, kCodeSwitched, kOther };

struct Token {
  std::string surface;  // normalized UTF-8, no whitespace
  LanguageTag tag = LanguageTag::kOther;
};

struct Sentence {
  std::vector<Token> tokens;
  SentenceKind kind = SentenceKind::kOther;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::string origin;
};

// Script-based language identity of a single token. Arabic wins if any
// codepoint is in the Arabic blocks and none is Latin, English symmetrically;
// digits, punctuation and mixed-script tokens are Other.
LanguageTag tag_language(const std::string& surface);

// Lowercases Latin letters (ASCII + Latin-1), strips Unicode directional and
// zero-width format marks, leaves Arabic untouched. May return an empty
// string if the token was made of format marks only.
std::string normalize_token(const std::string& raw);

// Splits a line on ASCII whitespace, normalizes and tags each token, and
// classifies the result. An empty or all-marks line yields an empty sentence
// which corpus loading drops.
Sentence tokenize(const std::string& line);

SentenceKind classify_sentence(const Sentence& s);

// One sentence per line, tokens space-separated. Drops empty lines. Throws
// std::runtime_error naming the line on invalid UTF-8.
Corpus load_corpus(const std::string& path);
Corpus parse_corpus(std::istream& in, const std::string& origin);
void save_corpus(const Corpus& c, const std::string& path);
std::string serialize_sentence(const Sentence& s);

struct CorpusStats {
  std::int64_t sentences_mono_arabic = 0;
  std::int64_t sentences_mono_english = 0;
  std::int64_t sentences_code_switched = 0;
  std::int64_t sentences_other = 0;
  std::int64_t tokens_arabic = 0;
  std::int64_t tokens_english = 0;
  std::int64_t tokens_other = 0;

  std::int64_t total_sentences() const {
    return sentences_mono_arabic + sentences_mono_english +
           sentences_code_switched + sentences_other;
  }
  std::int64_t total_tokens() const {
    return tokens_arabic + tokens_english + tokens_other;
  }
};

CorpusStats corpus_stats(const Corpus& c);

// Keeps the sentences whose kind is in `kinds`, preserving order.
Corpus select_sentences(const Corpus& c, const std::set<SentenceKind>& kinds);

// Word <-> dense id bijection with occurrence counts. Ids are assigned by
// descending count, ties broken lexicographically on the surface; the
// reserved tokens <s>, </s>, <unk> are always appended at the end.
class Vocabulary {
 public:
  static constexpr const char* kSentenceStart = "<s>";
  static constexpr const char* kSentenceEnd = "</s>";
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary() = default;

  int add(const std::string& word, std::int64_t count);

  int size() const { return static_cast<int>(words_.size()); }
  // Number of non-reserved entries.
  int regular_size() const { return size() - 3; }

  std::optional<int> lookup(const std::string& word) const;
  const std::string& word(int id) const { return words_[id]; }
  std::int64_t count(int id) const { return counts_[id]; }
  bool is_reserved(int id) const { return id >= regular_size(); }

  int start_id() const { return regular_size(); }
  int end_id() const { return regular_size() + 1; }
  int unk_id() const { return regular_size() + 2; }

  // Maps a surface to its id, falling back to <unk>.
  int id_or_unk(const std::string& word) const;

  std::int64_t total_count() const;

 private:
  friend Vocabulary build_vocabulary(const Corpus&, int);
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> index_;
};

// Counts every token, keeps words with count >= min_count, orders by
// descending count then lexicographically, appends the reserved tokens.
// Throws if no word survives the filter.
Vocabulary build_vocabulary(const Corpus& c, int min_count);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};

// Deterministic shuffle under `seed`, then partition into the given sizes.
// The sizes must sum to |c|.
std::array<Corpus, 3> split_corpus(const Corpus& c, const SplitSizes& sizes,
                                   std::uint64_t seed);

struct TranslationLexicon {
  // (arabic word, english word), no duplicates, both sides non-empty.
  std::vector<std::pair<std::string, std::string>> pairs;
};

// TSV `arabic<TAB>english`, one pair per line. Duplicates are dropped.
TranslationLexicon load_lexicon(const std::string& path);
TranslationLexicon parse_lexicon(std::istream& in, const std::string& origin);

// Keeps pairs whose both sides are in-vocabulary.
TranslationLexicon prune_lexicon(const TranslationLexicon& lex,
                                 const Vocabulary& vocab_ar,
                                 const Vocabulary& vocab_en);

struct AlignedSentencePair {
  Sentence src;  // language l1
  Sentence tgt;  // language l2
  std::vector<std::pair<int, int>> links;  // (src index, tgt index), 0-based
};

// Three line-aligned files: source sentences, target sentences, and
// alignments as space-separated `i-j` pairs. Links are validated against the
// sentence lengths; violations name the offending line.
std::vector<AlignedSentencePair> load_aligned(const std::string& path_src,
                                              const std::string& path_tgt,
                                              const std::string& path_align);

void save_aligned(const std::vector<AlignedSentencePair>& pairs,
                  const std::string& path_src, const std::string& path_tgt,
                  const std::string& path_align);

// Pairs a sentence with itself, every word aligned to its own position.
AlignedSentencePair fake_self_alignment(const Sentence& s);

struct GoldPartition {
  // category name -> list of (word, tag); a word appears in at most one
  // category per language.
  std::map<std::string, std::vector<std::pair<std::string, LanguageTag>>>
      categories;
};

// TSV `category<TAB>word<TAB>{ar|en}`.
GoldPartition load_gold_partition(const std::string& path);
GoldPartition parse_gold_partition(std::istream& in, const std::string& origin);
void save_gold_partition(const GoldPartition& gold, const std::string& path);

}  // namespace cslm

#endif  // CSLM_CORPUS_HPP_
