#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sylparse/errors.hpp"
#include "sylparse/sentence.hpp"

namespace sylparse {

using Warnings = std::vector<std::string>;

namespace detail {

inline std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                      : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline void warn(Warnings* sink, std::string message) {
  if (sink) {
    sink->push_back(std::move(message));
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Appends a word's syllables to `s` and records its span.
inline void append_word(AnnotatedSentence& s, std::string_view form, std::size_t line_no) {
  std::vector<std::string> syls;
  try {
    syls = split_word(form);
  } catch (const std::invalid_argument& e) {
    throw DataError("line " + std::to_string(line_no) + ": " + e.what());
  }
  const std::size_t first = s.syllables.size();
  for (auto& x : syls) s.syllables.push_back(std::move(x));
  s.words->push_back({first, s.syllables.size() - 1});
}

inline void finish_boundaries(AnnotatedSentence& s) {
  s.boundary_tags = tags_from_spans(*s.words, s.syllables.size());
}

}  // namespace detail

// Word-segmented text: one sentence per line, words separated by
// whitespace, syllables inside a word joined by '_'.
inline std::vector<AnnotatedSentence> read_segmented(std::istream& in, Warnings* warnings = nullptr) {
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.empty()) {
      detail::warn(warnings, "line " + std::to_string(line_no) + ": empty line skipped");
      continue;
    }
    AnnotatedSentence s;
    s.words.emplace();
    for (const auto& tok : tokens) detail::append_word(s, tok, line_no);
    detail::finish_boundaries(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_segmented(std::ostream& out, std::span<const AnnotatedSentence> sentences) {
  for (const auto& s : sentences) {
    for (std::size_t j = 0; j < s.word_count(); ++j) {
      if (j) out << ' ';
      out << word_form(s, j);
    }
    out << '\n';
  }
}

// Segmented and POS-tagged text: "Chúng_tôi/P học/V tiếng_Việt/N". The tag
// follows the last '/' of each token.
inline std::vector<AnnotatedSentence> read_tagged(std::istream& in, Warnings* warnings = nullptr) {
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.empty()) {
      detail::warn(warnings, "line " + std::to_string(line_no) + ": empty line skipped");
      continue;
    }
    AnnotatedSentence s;
    s.words.emplace();
    s.pos_tags.emplace();
    for (const auto& tok : tokens) {
      const std::size_t slash = tok.rfind('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == tok.size()) {
        throw DataError("line " + std::to_string(line_no) + ": token '" + tok +
                        "' is not of the form word/TAG");
      }
      detail::append_word(s, std::string_view(tok).substr(0, slash), line_no);
      s.pos_tags->push_back(tok.substr(slash + 1));
    }
    detail::finish_boundaries(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_tagged(std::ostream& out, std::span<const AnnotatedSentence> sentences) {
  for (const auto& s : sentences) {
    for (std::size_t j = 0; j < s.word_count(); ++j) {
      if (j) out << ' ';
      out << word_form(s, j) << '/' << s.pos_tags->at(j);
    }
    out << '\n';
  }
}

// Raw unsegmented text: one sentence per line, syllables separated by
// whitespace. Only `syllables` is populated.
inline std::vector<AnnotatedSentence> read_raw(std::istream& in, Warnings* warnings = nullptr) {
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = detail::split_whitespace(line);
    if (tokens.empty()) {
      detail::warn(warnings, "line " + std::to_string(line_no) + ": empty sentence skipped");
      continue;
    }
    AnnotatedSentence s;
    s.syllables = std::move(tokens);
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_raw(std::ostream& out, std::span<const AnnotatedSentence> sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.syllables.size(); ++i) {
      if (i) out << ' ';
      out << s.syllables[i];
    }
    out << '\n';
  }
}

namespace detail {

inline AnnotatedSentence parse_conllu_block(const std::vector<std::pair<std::size_t, std::string>>& lines) {
  AnnotatedSentence s;
  s.words.emplace();
  std::vector<std::string> pos, rels;
  std::vector<std::size_t> heads;
  std::size_t with_pos = 0, with_head = 0, with_rel = 0;
  const std::size_t block_line = lines.front().first;
  for (const auto& [line_no, line] : lines) {
    const auto cols = split_tabs(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (cols.size() < 8) throw DataError(where + "expected at least 8 tab-separated columns");
    const std::string& id = cols[0];
    if (id.find_first_of("-.") != std::string::npos) continue;  // multiword range / empty node
    std::size_t id_value = 0;
    const auto id_res = std::from_chars(id.data(), id.data() + id.size(), id_value);
    if (id_res.ec != std::errc() || id_res.ptr != id.data() + id.size()) {
      throw DataError(where + "non-integer ID '" + id + "'");
    }
    if (id_value != s.words->size() + 1) {
      throw DataError(where + "expected ID " + std::to_string(s.words->size() + 1) + ", got " + id);
    }
    append_word(s, cols[1], line_no);
    std::string tag = cols[3] != "_" ? cols[3] : cols[4];
    if (tag != "_") ++with_pos;
    pos.push_back(std::move(tag));
    const std::string& head = cols[6];
    if (head == "_") {
      heads.push_back(0);
    } else {
      std::size_t h = 0;
      const auto res = std::from_chars(head.data(), head.data() + head.size(), h);
      if (res.ec != std::errc() || res.ptr != head.data() + head.size()) {
        throw DataError(where + "non-integer head '" + head + "'");
      }
      heads.push_back(h);
      ++with_head;
    }
    if (cols[7] != "_") ++with_rel;
    rels.push_back(cols[7]);
  }
  const std::size_t n = s.words->size();
  const auto where = "sentence at line " + std::to_string(block_line) + ": ";
  if (n == 0) throw DataError(where + "no word lines");
  if (with_pos == n) {
    s.pos_tags = std::move(pos);
  } else if (with_pos != 0) {
    throw DataError(where + "POS column only partially filled");
  }
  if (with_head == n) {
    for (std::size_t h : heads) {
      if (h > n) throw DataError(where + "head " + std::to_string(h) + " out of range");
    }
    if (auto err = tree_error(heads)) throw DataError(where + *err);
    s.heads = std::move(heads);
  } else if (with_head != 0) {
    throw DataError(where + "HEAD column only partially filled");
  }
  if (with_rel == n) {
    s.deprels = std::move(rels);
  } else if (with_rel != 0) {
    throw DataError(where + "DEPREL column only partially filled");
  }
  finish_boundaries(s);
  return s;
}

}  // namespace detail

// CoNLL-U / CoNLL-X treebank. Word forms are split on '_' into syllables;
// the POS layer comes from UPOS, or XPOS when UPOS is "_". Comment lines,
// multiword ranges and empty nodes are ignored.
inline std::vector<AnnotatedSentence> read_conllu(std::istream& in) {
  std::vector<AnnotatedSentence> out;
  std::vector<std::pair<std::size_t, std::string>> block;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!block.empty()) out.push_back(detail::parse_conllu_block(block));
    block.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(std::move(line));
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    block.emplace_back(line_no, line);
  }
  flush();
  return out;
}

inline void write_conllu(std::ostream& out, std::span<const AnnotatedSentence> sentences) {
  for (const auto& s : sentences) {
    for (std::size_t j = 0; j < s.word_count(); ++j) {
      out << j + 1 << '\t' << word_form(s, j) << "\t_\t" << (s.pos_tags ? s.pos_tags->at(j) : "_")
          << "\t_\t_\t" << (s.heads ? std::to_string(s.heads->at(j)) : "_") << '\t'
          << (s.deprels ? s.deprels->at(j) : "_") << "\t_\t_\n";
    }
    out << '\n';
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

enum class CorpusFormat { segmented, tagged, conllu, raw };

// Reads a corpus file. Any file containing a tab is read as CoNLL-U;
// otherwise `fallback` decides the plain-text format.
inline std::vector<AnnotatedSentence> load_corpus(const std::string& path, CorpusFormat fallback,
                                                  Warnings* warnings = nullptr) {
  std::ifstream in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::istringstream stream(text);
  if (fallback == CorpusFormat::conllu ||
      (fallback != CorpusFormat::raw && text.find('\t') != std::string::npos)) {
    return read_conllu(stream);
  }
  switch (fallback) {
    case CorpusFormat::segmented: return read_segmented(stream, warnings);
    case CorpusFormat::tagged: return read_tagged(stream, warnings);
    default: return read_raw(stream, warnings);
  }
}

}  // namespace sylparse
