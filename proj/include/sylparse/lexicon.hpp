#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sylparse/corpus_io.hpp"
#include "sylparse/sentence.hpp"

namespace sylparse {

// Set of multi-syllable words for longest matching. Entries are keyed by
// their underscore-joined form; single-syllable entries are dropped since a
// match on them is indistinguishable from the no-match fallback.
class Lexicon {
 public:
  void insert(std::span<const std::string> syllables) {
    if (syllables.size() < 2) return;
    entries_.insert(join_syllables(syllables, {0, syllables.size() - 1}));
    max_length_ = std::max(max_length_, syllables.size());
  }

  void insert_word(std::string_view form) {
    const auto syls = split_word(form);
    insert(syls);
  }

  bool contains(std::span<const std::string> syllables) const {
    if (syllables.size() < 2 || syllables.size() > max_length_) return false;
    return entries_.count(join_syllables(syllables, {0, syllables.size() - 1})) > 0;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t max_length() const { return max_length_; }

  std::vector<std::string> entries() const {
    std::vector<std::string> out(entries_.begin(), entries_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const Lexicon& a, const Lexicon& b) { return a.entries_ == b.entries_; }

 private:
  std::unordered_set<std::string> entries_;
  std::size_t max_length_ = 0;
};

// Greedy left-to-right longest matching: B I..I over the longest entry that
// starts at the current syllable, or a lone B when nothing matches.
inline std::vector<BoundaryTag> initial_tags(std::span<const std::string> syllables,
                                             const Lexicon& lexicon) {
  std::vector<BoundaryTag> tags;
  tags.reserve(syllables.size());
  std::size_t i = 0;
  while (i < syllables.size()) {
    std::size_t len = 1;
    const std::size_t cap = std::min(lexicon.max_length(), syllables.size() - i);
    for (std::size_t k = cap; k >= 2; --k) {
      if (lexicon.contains(syllables.subspan(i, k))) {
        len = k;
        break;
      }
    }
    tags.push_back(BoundaryTag::B);
    for (std::size_t k = 1; k < len; ++k) tags.push_back(BoundaryTag::I);
    i += len;
  }
  return tags;
}

// All multi-syllable word types of gold-segmented sentences.
inline Lexicon build_lexicon(std::span<const AnnotatedSentence> sentences) {
  Lexicon lex;
  for (const auto& s : sentences) {
    if (!s.words) continue;
    for (const WordSpan& w : *s.words) {
      lex.insert(std::span<const std::string>(s.syllables).subspan(w.first, w.length()));
    }
  }
  return lex;
}

// One word per line, syllables joined by '_'.
inline Lexicon read_lexicon(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() > 1) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": expected one word per line");
    }
    try {
      lex.insert_word(tokens.front());
    } catch (const std::invalid_argument& e) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

inline void write_lexicon(std::ostream& out, const Lexicon& lex) {
  for (const auto& e : lex.entries()) out << e << '\n';
}

}  // namespace sylparse
