#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sylparse {

enum class BoundaryTag : std::uint8_t { B = 0, I = 1, O = 2 };
inline constexpr std::size_t kBoundaryTagCount = 3;

inline char to_char(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::B: return 'B';
    case BoundaryTag::I: return 'I';
    case BoundaryTag::O: return 'O';
  }
  return '?';
}

// Inclusive syllable range of one word: first and last syllable index.
struct WordSpan {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last - first + 1; }
  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

// One sentence with whichever annotation layers its source carries. Word
// heads are 1-based word indices with 0 denoting the artificial root.
struct AnnotatedSentence {
  std::vector<std::string> syllables;
  std::optional<std::vector<BoundaryTag>> boundary_tags;
  std::optional<std::vector<WordSpan>> words;
  std::optional<std::vector<std::string>> pos_tags;
  std::optional<std::vector<std::size_t>> heads;
  std::optional<std::vector<std::string>> deprels;

  std::size_t word_count() const { return words ? words->size() : 0; }

  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) = default;
};

struct ParseTree {
  std::vector<std::size_t> heads;
  std::vector<std::string> labels;
};

inline std::string join_syllables(std::span<const std::string> syllables, WordSpan span) {
  std::string out = syllables[span.first];
  for (std::size_t i = span.first + 1; i <= span.last; ++i) {
    out += '_';
    out += syllables[i];
  }
  return out;
}

inline std::string word_form(const AnnotatedSentence& s, std::size_t word) {
  return join_syllables(s.syllables, s.words->at(word));
}

// Splits an underscore-joined word into syllables. Empty pieces (a lone
// "_", leading, trailing or doubled underscores) are rejected.
inline std::vector<std::string> split_word(std::string_view word) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = word.find('_', start);
    const std::string_view piece =
        word.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (piece.empty()) {
      throw std::invalid_argument("empty syllable in word '" + std::string(word) + "'");
    }
    out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<BoundaryTag> tags_from_spans(std::span<const WordSpan> words, std::size_t m) {
  std::vector<BoundaryTag> tags(m, BoundaryTag::I);
  for (const WordSpan& w : words) tags.at(w.first) = BoundaryTag::B;
  return tags;
}

struct SpanDecoding {
  std::vector<WordSpan> words;
  std::size_t repairs = 0;  // I tags promoted to B
};

// Rebuilds word spans from boundary tags. O starts a single-syllable word;
// an I at sentence start or right after an O is promoted to B and counted.
inline SpanDecoding spans_from_tags(std::span<const BoundaryTag> tags) {
  SpanDecoding out;
  bool after_o = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    BoundaryTag t = tags[i];
    if (t == BoundaryTag::I && (i == 0 || after_o)) {
      t = BoundaryTag::B;
      ++out.repairs;
    }
    if (t == BoundaryTag::I) {
      out.words.back().last = i;
    } else {
      out.words.push_back({i, i});
    }
    after_o = t == BoundaryTag::O;
  }
  return out;
}

// True iff the spans partition [0, m) contiguously and in order.
inline bool is_partition(std::span<const WordSpan> words, std::size_t m) {
  std::size_t next = 0;
  for (const WordSpan& w : words) {
    if (w.first != next || w.last < w.first) return false;
    next = w.last + 1;
  }
  return next == m;
}

// Empty when heads form a tree over words 1..n rooted at 0; otherwise the
// reason it does not.
inline std::optional<std::string> tree_error(std::span<const std::size_t> heads) {
  const std::size_t n = heads.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (heads[j] > n) {
      return "head " + std::to_string(heads[j]) + " of word " + std::to_string(j + 1) +
             " out of range";
    }
    if (heads[j] == j + 1) return "word " + std::to_string(j + 1) + " is its own head";
  }
  for (std::size_t j = 1; j <= n; ++j) {
    std::size_t cur = j;
    std::size_t steps = 0;
    while (cur != 0) {
      cur = heads[cur - 1];
      if (++steps > n) return "cycle through word " + std::to_string(j);
    }
  }
  return std::nullopt;
}

inline bool is_tree(std::span<const std::size_t> heads) { return !tree_error(heads).has_value(); }

// No two arcs cross when drawn above the sentence, root arcs included.
inline bool is_projective(std::span<const std::size_t> heads) {
  const std::size_t n = heads.size();
  for (std::size_t a = 1; a <= n; ++a) {
    const std::size_t al = std::min(a, heads[a - 1]), ar = std::max(a, heads[a - 1]);
    for (std::size_t b = a + 1; b <= n; ++b) {
      const std::size_t bl = std::min(b, heads[b - 1]), br = std::max(b, heads[b - 1]);
      if ((al < bl && bl < ar && ar < br) || (bl < al && al < br && br < ar)) return false;
    }
  }
  return true;
}

inline bool is_projective(const ParseTree& tree) { return is_projective(tree.heads); }

}  // namespace sylparse
