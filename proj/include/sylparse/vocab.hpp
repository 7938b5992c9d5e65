#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sylparse {

// Token inventory with training counts. Id 0 is the unknown row; it is
// never reachable through a token string.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;

  Vocabulary() : tokens_{"<unk>"}, counts_{0} {}

  std::size_t add(std::string_view token, std::size_t count = 0) {
    auto it = index_.find(std::string(token));
    if (it != index_.end()) {
      counts_[it->second] += count;
      return it->second;
    }
    const std::size_t id = tokens_.size();
    tokens_.emplace_back(token);
    counts_.push_back(count);
    index_.emplace(std::string(token), id);
    return id;
  }

  std::size_t id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnknown : it->second;
  }

  bool contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t count(std::size_t id) const { return counts_.at(id); }
  std::size_t size() const { return tokens_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Closed label inventory (POS tags, dependency relations).
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(std::vector<std::string> labels) {
    for (auto& l : labels) add(l);
  }

  std::size_t add(std::string_view label) {
    auto it = index_.find(std::string(label));
    if (it != index_.end()) return it->second;
    labels_.emplace_back(label);
    index_.emplace(std::string(label), labels_.size() - 1);
    return labels_.size() - 1;
  }

  std::optional<std::size_t> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(std::size_t id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

  friend bool operator==(const TagSet& a, const TagSet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ModelVocabulary {
  Vocabulary syllables;
  Vocabulary words;
  TagSet pos_tags;
  TagSet labels;
};

}  // namespace sylparse
