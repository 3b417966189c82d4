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

#include "cslm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cslm/rng.hpp"

namespace cslm {
namespace {

// Decodes one UTF-8 codepoint starting at s[i]. Advances i past it. Returns
// false on malformed input (truncated, overlong, surrogate, out of range).
bool decode_utf8(const std::string& s, std::size_t& i, char32_t& out) {
  const auto byte = [&](std::size_t k) -> unsigned {
    return static_cast<unsigned char>(s[k]);
  };
  unsigned b0 = byte(i);
  if (b0 < 0x80) {
    out = b0;
    i += 1;
    return true;
  }
  int len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return false;
  }
  if (i + len > s.size()) return false;
  for (int k = 1; k < len; ++k) {
    unsigned b = byte(i + k);
    if ((b & 0xC0) != 0x80) return false;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len]) return false;                    // overlong
  if (cp >= 0xD800 && cp <= 0xDFFF) return false;      // surrogate
  if (cp > 0x10FFFF) return false;
  out = cp;
  i += len;
  return true;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Arabic letters only: punctuation and digits inside the Arabic blocks stay
// neutral so they cannot flip a sentence's classification.
bool is_arabic_cp(char32_t c) {
  return (c >= 0x0620 && c <= 0x064A && c != 0x0640) ||  // core letters
         (c >= 0x066E && c <= 0x06D3) ||                 // extended letters
         c == 0x06D5 || (c >= 0x06EE && c <= 0x06EF) ||
         (c >= 0x06FA && c <= 0x06FF) ||
         (c >= 0x0750 && c <= 0x077F) ||   // supplement
         (c >= 0x08A0 && c <= 0x08FF) ||   // extended-A
         (c >= 0xFB50 && c <= 0xFDC7) ||   // presentation forms A
         (c >= 0xFDF0 && c <= 0xFDFB) ||
         (c >= 0xFE70 && c <= 0xFEFC);     // presentation forms B
}

bool is_latin_cp(char32_t c) {
  if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) return true;
  if (c >= 0x00C0 && c <= 0x00FF && c != 0x00D7 && c != 0x00F7) return true;
  if (c >= 0x0100 && c <= 0x024F) return true;
  if (c >= 0x1E00 && c <= 0x1EFF) return true;
  return false;
}

// Directional, zero-width and BOM format marks stripped by normalization.
bool is_format_mark(char32_t c) {
  return (c >= 0x200B && c <= 0x200F) || (c >= 0x202A && c <= 0x202E) ||
         (c >= 0x2066 && c <= 0x2069) || c == 0x061C || c == 0xFEFF ||
         c == 0x00AD;
}

char32_t lowercase_latin(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 0x20;
  return c;
}

[[noreturn]] void line_error(const std::string& origin, std::size_t line_no,
                             const std::string& what) {
  std::ostringstream msg;
  msg << origin << ":" << line_no << ": " << what;
  throw std::runtime_error(msg.str());
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

LanguageTag tag_language(const std::string& surface) {
  bool has_arabic = false, has_latin = false;
  std::size_t i = 0;
  while (i < surface.size()) {
    char32_t cp;
    if (!decode_utf8(surface, i, cp)) return LanguageTag::kOther;
    has_arabic = has_arabic || is_arabic_cp(cp);
    has_latin = has_latin || is_latin_cp(cp);
  }
  if (has_arabic && !has_latin) return LanguageTag::kArabic;
  if (has_latin && !has_arabic) return LanguageTag::kEnglish;
  return LanguageTag::kOther;
}

std::string normalize_token(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    char32_t cp;
    if (!decode_utf8(raw, i, cp)) throw std::runtime_error("invalid UTF-8");
    if (is_format_mark(cp)) continue;
    encode_utf8(lowercase_latin(cp), out);
  }
  return out;
}

Sentence tokenize(const std::string& line) {
  Sentence s;
  std::size_t i = 0;
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
           c == '\f';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i == start) break;
    std::string surf = normalize_token(line.substr(start, i - start));
    if (surf.empty()) continue;  // token was only format marks
    s.tokens.push_back(Token{surf, tag_language(surf)});
  }
  if (!s.tokens.empty()) s.kind = classify_sentence(s);
  return s;
}

SentenceKind classify_sentence(const Sentence& s) {
  bool arabic = false, english = false;
  for (const auto& t : s.tokens) {
    arabic = arabic || t.tag == LanguageTag::kArabic;
    english = english || t.tag == LanguageTag::kEnglish;
  }
  if (arabic && english) return SentenceKind::kCodeSwitched;
  if (arabic) return SentenceKind::kMonoArabic;
  if (english) return SentenceKind::kMonoEnglish;
  return SentenceKind::kOther;
}

Corpus parse_corpus(std::istream& in, const std::string& origin) {
  Corpus c;
  c.origin = origin;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Sentence s;
    try {
      s = tokenize(line);
    } catch (const std::runtime_error& e) {
      line_error(origin, line_no, e.what());
    }
    if (!s.tokens.empty()) c.sentences.push_back(std::move(s));
  }
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus " + path);
  return parse_corpus(in, path);
}

std::string serialize_sentence(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += s.tokens[i].surface;
  }
  return out;
}

void save_corpus(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus " + path);
  for (const auto& s : c.sentences) out << serialize_sentence(s) << '\n';
}

CorpusStats corpus_stats(const Corpus& c) {
  CorpusStats st;
  for (const auto& s : c.sentences) {
    switch (s.kind) {
      case SentenceKind::kMonoArabic: ++st.sentences_mono_arabic; break;
      case SentenceKind::kMonoEnglish: ++st.sentences_mono_english; break;
      case SentenceKind::kCodeSwitched: ++st.sentences_code_switched; break;
      case SentenceKind::kOther: ++st.sentences_other; break;
    }
    for (const auto& t : s.tokens) {
      switch (t.tag) {
        case LanguageTag::kArabic: ++st.tokens_arabic; break;
        case LanguageTag::kEnglish: ++st.tokens_english; break;
        case LanguageTag::kOther: ++st.tokens_other; break;
      }
    }
  }
  return st;
}

Corpus select_sentences(const Corpus& c, const std::set<SentenceKind>& kinds) {
  Corpus out;
  out.origin = c.origin;
  for (const auto& s : c.sentences) {
    if (kinds.count(s.kind)) out.sentences.push_back(s);
  }
  return out;
}

int Vocabulary::add(const std::string& word, std::int64_t count) {
  auto it = index_.find(word);
  if (it != index_.end()) {
    counts_[it->second] += count;
    return it->second;
  }
  int id = static_cast<int>(words_.size());
  words_.push_back(word);
  counts_.push_back(count);
  index_.emplace(word, id);
  return id;
}

std::optional<int> Vocabulary::lookup(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id_or_unk(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? unk_id() : it->second;
}

std::int64_t Vocabulary::total_count() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

Vocabulary build_vocabulary(const Corpus& c, int min_count) {
  if (min_count < 1) throw std::runtime_error("min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& s : c.sentences)
    for (const auto& t : s.tokens) ++counts[t.surface];

  // Literal occurrences of the reserved surfaces map onto the reserved
  // entries instead of competing for regular ids.
  const std::string reserved[3] = {Vocabulary::kSentenceStart,
                                   Vocabulary::kSentenceEnd,
                                   Vocabulary::kUnknown};
  std::int64_t reserved_counts[3] = {0, 0, 0};
  for (int r = 0; r < 3; ++r) {
    auto it = counts.find(reserved[r]);
    if (it != counts.end()) {
      reserved_counts[r] = it->second;
      counts.erase(it);
    }
  }

  std::vector<std::pair<std::string, std::int64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [word, count] : counts) {
    if (count >= min_count) kept.emplace_back(word, count);
  }
  if (kept.empty()) {
    throw std::runtime_error(
        "empty vocabulary: no word reaches min_count=" +
        std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  for (auto& [word, count] : kept) v.add(word, count);
  for (int r = 0; r < 3; ++r) v.add(reserved[r], reserved_counts[r]);
  return v;
}

std::array<Corpus, 3> split_corpus(const Corpus& c, const SplitSizes& sizes,
                                   std::uint64_t seed) {
  const std::size_t n = c.sentences.size();
  if (sizes.train + sizes.dev + sizes.test != n) {
    throw std::runtime_error(
        "split sizes sum to " +
        std::to_string(sizes.train + sizes.dev + sizes.test) + " but corpus has " +
        std::to_string(n) + " sentences");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  std::array<Corpus, 3> out;
  const char* names[3] = {"train", "dev", "test"};
  const std::size_t bounds[3] = {sizes.train, sizes.dev, sizes.test};
  std::size_t pos = 0;
  for (int part = 0; part < 3; ++part) {
    out[part].origin = c.origin.empty() ? names[part]
                                        : c.origin + "." + names[part];
    for (std::size_t k = 0; k < bounds[part]; ++k)
      out[part].sentences.push_back(c.sentences[order[pos++]]);
  }
  return out;
}

TranslationLexicon parse_lexicon(std::istream& in, const std::string& origin) {
  TranslationLexicon lex;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      line_error(origin, line_no, "expected arabic<TAB>english");
    std::string ar, en;
    try {
      ar = normalize_token(line.substr(0, tab));
      en = normalize_token(line.substr(tab + 1));
    } catch (const std::runtime_error& e) {
      line_error(origin, line_no, e.what());
    }
    if (ar.empty() || en.empty())
      line_error(origin, line_no, "empty side in lexicon pair");
    if (en.find('\t') != std::string::npos)
      line_error(origin, line_no, "too many fields");
    if (seen.insert({ar, en}).second) lex.pairs.emplace_back(ar, en);
  }
  return lex;
}

TranslationLexicon load_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open lexicon " + path);
  return parse_lexicon(in, path);
}

TranslationLexicon prune_lexicon(const TranslationLexicon& lex,
                                 const Vocabulary& vocab_ar,
                                 const Vocabulary& vocab_en) {
  TranslationLexicon out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [ar, en] : lex.pairs) {
    auto id_ar = vocab_ar.lookup(ar);
    auto id_en = vocab_en.lookup(en);
    if (!id_ar || !id_en) continue;
    if (vocab_ar.is_reserved(*id_ar) || vocab_en.is_reserved(*id_en)) continue;
    if (seen.insert({ar, en}).second) out.pairs.emplace_back(ar, en);
  }
  return out;
}

std::vector<AlignedSentencePair> load_aligned(const std::string& path_src,
                                              const std::string& path_tgt,
                                              const std::string& path_align) {
  auto src_lines = read_lines(path_src);
  auto tgt_lines = read_lines(path_tgt);
  auto align_lines = read_lines(path_align);
  if (src_lines.size() != tgt_lines.size() ||
      src_lines.size() != align_lines.size()) {
    throw std::runtime_error(
        "parallel corpus line counts differ: " + std::to_string(src_lines.size()) +
        " / " + std::to_string(tgt_lines.size()) + " / " +
        std::to_string(align_lines.size()));
  }
  std::vector<AlignedSentencePair> out;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    AlignedSentencePair p;
    try {
      p.src = tokenize(src_lines[i]);
      p.tgt = tokenize(tgt_lines[i]);
    } catch (const std::runtime_error& e) {
      line_error(path_src, i + 1, e.what());
    }
    std::istringstream as(align_lines[i]);
    std::string link;
    while (as >> link) {
      auto dash = link.find('-');
      if (dash == std::string::npos || dash == 0 || dash + 1 == link.size())
        line_error(path_align, i + 1, "malformed link '" + link + "'");
      int a, b;
      try {
        a = std::stoi(link.substr(0, dash));
        b = std::stoi(link.substr(dash + 1));
      } catch (const std::exception&) {
        line_error(path_align, i + 1, "malformed link '" + link + "'");
      }
      if (a < 0 || b < 0 || a >= static_cast<int>(p.src.tokens.size()) ||
          b >= static_cast<int>(p.tgt.tokens.size())) {
        line_error(path_align, i + 1,
                   "link " + link + " out of range for sentence lengths " +
                       std::to_string(p.src.tokens.size()) + "/" +
                       std::to_string(p.tgt.tokens.size()));
      }
      p.links.emplace_back(a, b);
    }
    out.push_back(std::move(p));
  }
  return out;
}

void save_aligned(const std::vector<AlignedSentencePair>& pairs,
                  const std::string& path_src, const std::string& path_tgt,
                  const std::string& path_align) {
  std::ofstream src(path_src, std::ios::binary);
  std::ofstream tgt(path_tgt, std::ios::binary);
  std::ofstream align(path_align, std::ios::binary);
  if (!src || !tgt || !align)
    throw std::runtime_error("cannot write parallel corpus files");
  for (const auto& p : pairs) {
    src << serialize_sentence(p.src) << '\n';
    tgt << serialize_sentence(p.tgt) << '\n';
    for (std::size_t i = 0; i < p.links.size(); ++i) {
      if (i) align << ' ';
      align << p.links[i].first << '-' << p.links[i].second;
    }
    align << '\n';
  }
}

AlignedSentencePair fake_self_alignment(const Sentence& s) {
  AlignedSentencePair p;
  p.src = s;
  p.tgt = s;
  for (int i = 0; i < static_cast<int>(s.tokens.size()); ++i)
    p.links.emplace_back(i, i);
  return p;
}

GoldPartition parse_gold_partition(std::istream& in,
                                   const std::string& origin) {
  GoldPartition gold;
  // (word, tag) -> category, for the uniqueness check
  std::map<std::pair<std::string, int>, std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos
                                      : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      line_error(origin, line_no, "expected category<TAB>word<TAB>{ar|en}");
    std::string category = line.substr(0, t1);
    std::string word;
    try {
      word = normalize_token(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const std::runtime_error& e) {
      line_error(origin, line_no, e.what());
    }
    std::string lang = line.substr(t2 + 1);
    LanguageTag tag;
    if (lang == "ar") {
      tag = LanguageTag::kArabic;
    } else if (lang == "en") {
      tag = LanguageTag::kEnglish;
    } else {
      line_error(origin, line_no, "language must be 'ar' or 'en', got '" +
                                      lang + "'");
    }
    if (category.empty() || word.empty())
      line_error(origin, line_no, "empty category or word");
    auto key = std::make_pair(word, static_cast<int>(tag));
    auto it = seen.find(key);
    if (it != seen.end() && it->second != category) {
      line_error(origin, line_no,
                 "word '" + word + "' already in category '" + it->second + "'");
    }
    if (it == seen.end()) {
      seen.emplace(key, category);
      gold.categories[category].emplace_back(word, tag);
    }
  }
  return gold;
}

GoldPartition load_gold_partition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open gold partition " + path);
  return parse_gold_partition(in, path);
}

void save_gold_partition(const GoldPartition& gold, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write gold partition " + path);
  for (const auto& [category, words] : gold.categories) {
    for (const auto& [word, tag] : words) {
      out << category << '\t' << word << '\t'
          << (tag == LanguageTag::kArabic ? "ar" : "en") << '\n';
    }
  }
}

}  // namespace cslm
