#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "sylparse/errors.hpp"
#include "sylparse/sentence.hpp"

namespace sylparse {

// Half-open syllable interval [start, end) of one word.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

inline TokenSpan token_span(const WordSpan& w) { return {w.first, w.last + 1}; }

struct MetricScore {
  std::size_t correct = 0;
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::size_t sentences = 0;
  std::size_t gold_words = 0;
  std::size_t system_words = 0;
  std::size_t aligned_words = 0;
  MetricScore wseg, ptag, uas, las;
  bool has_pos = false;    // POS present on both sides of every sentence
  bool has_trees = false;  // heads and labels present on both sides
  // Sentence-level F1 (percent), for significance testing.
  std::vector<double> sentence_wseg, sentence_ptag, sentence_uas, sentence_las;
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline MetricScore make_metric(std::size_t correct, std::size_t system, std::size_t gold) {
  MetricScore m;
  m.correct = correct;
  m.precision = system ? 100.0 * static_cast<double>(correct) / static_cast<double>(system) : 0.0;
  m.recall = gold ? 100.0 * static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

// Pairs (gold word, system word) whose syllable spans are identical.
inline std::vector<std::pair<std::size_t, std::size_t>> align(const AnnotatedSentence& gold,
                                                              const AnnotatedSentence& system) {
  if (gold.syllables != system.syllables) {
    throw DataError("align: gold and system syllable streams differ");
  }
  if (!gold.words || !system.words) throw DataError("align: both sides need a segmentation");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t g = 0, s = 0;
  const auto& gw = *gold.words;
  const auto& sw = *system.words;
  while (g < gw.size() && s < sw.size()) {
    const TokenSpan a = token_span(gw[g]), b = token_span(sw[s]);
    if (a == b) {
      out.emplace_back(g++, s++);
    } else if (a.end <= b.end) {
      ++g;
      if (a.end == b.end) ++s;
    } else {
      ++s;
    }
  }
  return out;
}

struct SentenceCounts {
  std::size_t gold = 0, system = 0, aligned = 0, pos = 0, uas = 0, las = 0;
};

inline SentenceCounts count_sentence(const AnnotatedSentence& gold, const AnnotatedSentence& system,
                                     bool with_pos, bool with_trees) {
  const auto pairs = align(gold, system);
  SentenceCounts c;
  c.gold = gold.word_count();
  c.system = system.word_count();
  c.aligned = pairs.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> gold_to_system(c.gold, kNone);
  for (const auto& [g, s] : pairs) gold_to_system[g] = s;
  for (const auto& [g, s] : pairs) {
    if (with_pos && gold.pos_tags->at(g) == system.pos_tags->at(s)) ++c.pos;
    if (!with_trees) continue;
    const std::size_t gh = gold.heads->at(g), sh = system.heads->at(s);
    const bool head_ok = (gh == 0 && sh == 0) || (gh > 0 && sh > 0 && gold_to_system[gh - 1] == sh - 1);
    if (!head_ok) continue;
    ++c.uas;
    if (gold.deprels->at(g) == system.deprels->at(s)) ++c.las;
  }
  return c;
}

// WSeg, PTag, UAS and LAS as F1 over aligned words. All tokens count,
// punctuation included. PTag needs POS on both sides and UAS/LAS need
// labelled trees on both sides; otherwise those metrics stay at zero and
// the corresponding `has_*` flag is false.
inline EvalReport score(std::span<const AnnotatedSentence> gold, std::span<const AnnotatedSentence> system) {
  if (gold.size() != system.size()) {
    throw DataError("score: " + std::to_string(gold.size()) + " gold vs " +
                    std::to_string(system.size()) + " system sentences");
  }
  EvalReport r;
  r.sentences = gold.size();
  r.has_pos = !gold.empty();
  r.has_trees = !gold.empty();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    r.has_pos = r.has_pos && gold[i].pos_tags && system[i].pos_tags;
    r.has_trees = r.has_trees && gold[i].heads && system[i].heads && gold[i].deprels && system[i].deprels;
  }
  SentenceCounts total;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const SentenceCounts c = count_sentence(gold[i], system[i], r.has_pos, r.has_trees);
    total.gold += c.gold;
    total.system += c.system;
    total.aligned += c.aligned;
    total.pos += c.pos;
    total.uas += c.uas;
    total.las += c.las;
    r.sentence_wseg.push_back(make_metric(c.aligned, c.system, c.gold).f1);
    r.sentence_ptag.push_back(make_metric(c.pos, c.system, c.gold).f1);
    r.sentence_uas.push_back(make_metric(c.uas, c.system, c.gold).f1);
    r.sentence_las.push_back(make_metric(c.las, c.system, c.gold).f1);
  }
  r.gold_words = total.gold;
  r.system_words = total.system;
  r.aligned_words = total.aligned;
  r.wseg = make_metric(total.aligned, total.system, total.gold);
  r.ptag = make_metric(total.pos, total.system, total.gold);
  r.uas = make_metric(total.uas, total.system, total.gold);
  r.las = make_metric(total.las, total.system, total.gold);
  return r;
}

inline EvalReport score(const AnnotatedSentence& gold, const AnnotatedSentence& system) {
  return score(std::span<const AnnotatedSentence>(&gold, 1), std::span<const AnnotatedSentence>(&system, 1));
}

// Two decimals, half-up.
inline std::string format_percent(double value) {
  const double rounded = std::floor(value * 100.0 + 0.5 + 1e-9) / 100.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", rounded);
  return buf;
}

// Two-sided paired t-test p-value on n - 1 degrees of freedom. Identical
// inputs give 1; a constant non-zero difference has zero variance and an
// unbounded t statistic, giving 0.
inline double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("paired_t_test: need two equal-length samples of size >= 2");
  }
  const std::size_t n = a.size();
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = a[i] - b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  bool all_zero = true;
  for (double x : d) {
    ss += (x - mean) * (x - mean);
    all_zero = all_zero && x == 0.0;
  }
  if (all_zero) return 1.0;
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

inline void write_report_text(std::ostream& out, const EvalReport& r) {
  out << "Metric     | Precision |    Recall |  F1 Score\n"
      << "-----------+-----------+-----------+-----------\n";
  auto row = [&](const char* name, const MetricScore& m) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-10s | %9s | %9s | %9s\n", name, format_percent(m.precision).c_str(),
                  format_percent(m.recall).c_str(), format_percent(m.f1).c_str());
    out << buf;
  };
  row("WSeg", r.wseg);
  if (r.has_pos) row("PTag", r.ptag);
  if (r.has_trees) {
    row("UAS", r.uas);
    row("LAS", r.las);
  }
}

// Line-delimited key=value form of the report.
inline void write_report_kv(std::ostream& out, const EvalReport& r) {
  out << "sentences=" << r.sentences << '\n'
      << "gold_words=" << r.gold_words << '\n'
      << "system_words=" << r.system_words << '\n'
      << "aligned_words=" << r.aligned_words << '\n';
  auto metric = [&](const char* name, const MetricScore& m) {
    out << name << "_correct=" << m.correct << '\n'
        << name << "_precision=" << format_percent(m.precision) << '\n'
        << name << "_recall=" << format_percent(m.recall) << '\n'
        << name << "_f1=" << format_percent(m.f1) << '\n';
  };
  metric("wseg", r.wseg);
  if (r.has_pos) metric("ptag", r.ptag);
  if (r.has_trees) {
    metric("uas", r.uas);
    metric("las", r.las);
  }
}

}  // namespace sylparse
