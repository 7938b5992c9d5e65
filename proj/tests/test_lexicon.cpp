#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace sylparse;
using enum BoundaryTag;

namespace {

Lexicon lexicon_of(std::initializer_list<const char*> words) {
  Lexicon l;
  for (const char* w : words) l.insert_word(w);
  return l;
}

using Syls = std::vector<std::string>;

// All lexicon spans starting at i; the longest one is what greedy matching
// must take.
std::size_t longest_match_by_enumeration(const Syls& s, std::size_t i, const Lexicon& lex) {
  std::size_t best = 1;
  for (std::size_t end = i + 2; end <= s.size(); ++end) {
    if (lex.contains(std::span(s).subspan(i, end - i))) best = end - i;
  }
  return best;
}

}  // namespace

TEST(InitialTags, LongestMatchThenFallback) {
  EXPECT_EQ(initial_tags(Syls{"Tôi", "là", "sinh", "viên"}, lexicon_of({"sinh_viên"})),
            (std::vector<BoundaryTag>{B, B, B, I}));
}

TEST(InitialTags, EmptyLexiconGivesAllB) {
  EXPECT_EQ(initial_tags(Syls{"x", "y", "z"}, Lexicon{}), (std::vector<BoundaryTag>{B, B, B}));
}

TEST(InitialTags, LongestMatchWins) {
  EXPECT_EQ(initial_tags(Syls{"a", "b", "c"}, lexicon_of({"a_b", "a_b_c", "b_c"})),
            (std::vector<BoundaryTag>{B, I, I}));
  EXPECT_EQ(longest_match_by_enumeration(Syls{"a", "b", "c"}, 0, lexicon_of({"a_b", "a_b_c", "b_c"})), 3u);
}

TEST(InitialTags, GreedyAgreesWithEnumerationOnRandomInputs) {
  std::mt19937_64 rng(21);
  const Syls alphabet{"a", "b", "c"};
  std::uniform_int_distribution<std::size_t> pick(0, 2), len(1, 10), entry_len(2, 4);
  for (int trial = 0; trial < 300; ++trial) {
    Lexicon lex;
    for (int e = 0; e < 4; ++e) {
      Syls entry(entry_len(rng));
      for (auto& x : entry) x = alphabet[pick(rng)];
      lex.insert(entry);
    }
    Syls s(len(rng));
    for (auto& x : s) x = alphabet[pick(rng)];
    const auto tags = initial_tags(s, lex);
    ASSERT_EQ(tags.size(), s.size());
    EXPECT_EQ(tags.front(), B);
    EXPECT_EQ(tags, initial_tags(s, lex));
    // Replay: every B must start a maximal match.
    std::size_t i = 0;
    while (i < s.size()) {
      const std::size_t k = longest_match_by_enumeration(s, i, lex);
      EXPECT_EQ(tags[i], B);
      for (std::size_t j = 1; j < k; ++j) EXPECT_EQ(tags[i + j], I);
      i += k;
    }
  }
}

TEST(BuildLexicon, Examples) {
  std::istringstream one("Tôi là sinh_viên\n");
  EXPECT_EQ(build_lexicon(read_segmented(one)).entries(), std::vector<std::string>{"sinh_viên"});
  EXPECT_TRUE(build_lexicon(std::vector<AnnotatedSentence>{}).empty());
  std::istringstream dup("a_b x\na_b\n");
  EXPECT_EQ(build_lexicon(read_segmented(dup)).entries(), std::vector<std::string>{"a_b"});
}

TEST(LexiconFile, RoundTripAndErrors) {
  const Lexicon lex = lexicon_of({"sinh_viên", "học_sinh", "a_b_c"});
  std::ostringstream out;
  write_lexicon(out, lex);
  std::istringstream in(out.str());
  EXPECT_EQ(read_lexicon(in), lex);
  std::istringstream bad("a_b c_d\n");
  EXPECT_THROW(read_lexicon(bad), DataError);
}
