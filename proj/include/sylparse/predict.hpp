#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sylparse/corpus_io.hpp"
#include "sylparse/model.hpp"

namespace sylparse {

struct PredictOptions {
  // Use the input's own word segmentation instead of decoding one.
  bool gold_segmentation = false;
};

struct PredictStats {
  std::size_t sentences = 0;
  std::size_t skipped = 0;
  std::size_t repairs = 0;
};

// End-to-end decoding of every input sentence, in input order. Empty
// sentences are skipped with a warning.
inline std::vector<AnnotatedSentence> predict(const JointModel& model,
                                              std::span<const AnnotatedSentence> inputs,
                                              const PredictOptions& options = {},
                                              PredictStats* stats = nullptr,
                                              Warnings* warnings = nullptr) {
  std::vector<AnnotatedSentence> out;
  out.reserve(inputs.size());
  PredictStats local;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const AnnotatedSentence& in = inputs[i];
    if (in.syllables.empty()) {
      detail::warn(warnings, "sentence " + std::to_string(i + 1) + " is empty; skipped");
      ++local.skipped;
      continue;
    }
    if (options.gold_segmentation && !in.words) {
      throw DataError("predict: sentence " + std::to_string(i + 1) + " has no gold segmentation");
    }
    out.push_back(model.predict(in.syllables, options.gold_segmentation ? &*in.words : nullptr,
                                &local.repairs));
    ++local.sentences;
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace sylparse
