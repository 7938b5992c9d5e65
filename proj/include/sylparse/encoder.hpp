#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sylparse/context.hpp"
#include "sylparse/hyperparameters.hpp"
#include "sylparse/layers.hpp"
#include "sylparse/lstm.hpp"
#include "sylparse/sentence.hpp"
#include "sylparse/vocab.hpp"

namespace sylparse {

// Lookup tables. Row 0 of the syllable and word tables is the unknown row.
struct EmbeddingTables {
  Parameter* syllables = nullptr;  // |syllable vocab| x syllable_dim
  Parameter* boundaries = nullptr; // 3 x boundary_dim; absent under no_initial_bio
  Parameter* words = nullptr;      // |word vocab| x word_dim
  Parameter* pos_tags = nullptr;   // |POS tagset| x pos_dim; absent under no_pos_embedding
  Parameter* root = nullptr;       // parser input of the artificial root
};

struct PosStates {
  std::vector<ad::Expr> states;     // r^(pos)
  std::vector<ad::Expr> emissions;  // h^(pos), one score per POS tag
};

// Word dropout rate for a token seen `count` times in training.
inline double word_dropout_probability(std::size_t count, double alpha = 0.25) {
  if (count < 1) throw std::invalid_argument("word dropout: count must be at least 1");
  return alpha / (alpha + static_cast<double>(count));
}

// Vocabulary id of `token`; while training it is replaced by the unknown id
// with the word-dropout rate of its training count.
inline std::size_t token_id(const Vocabulary& vocab, std::string_view token, ForwardContext& ctx) {
  const std::size_t id = vocab.id(token);
  if (!ctx.training || ctx.word_dropout_alpha <= 0.0 || !ctx.rng || id == Vocabulary::kUnknown) return id;
  const std::size_t count = vocab.count(id);
  if (count == 0) return id;
  std::bernoulli_distribution replace(word_dropout_probability(count, ctx.word_dropout_alpha));
  return replace(*ctx.rng) ? Vocabulary::kUnknown : id;
}

// Everything below the CRFs and the parser: syllable vectors, the
// segmentation BiLSTM, syllable-composed word vectors, the tagging BiLSTM
// and the parsing BiLSTM.
class Encoder {
 public:
  Encoder(ParameterStore& store, const std::string& prefix, const Hyperparameters& hp,
          const ModelVocabulary& vocab)
      : hp_(hp),
        vocab_(&vocab),
        bilstm_ws_(store, prefix + "/bilstm_ws", hp.syllable_input_dim(), hp.lstm_hidden, hp.lstm_layers),
        ffnn_ws_(store, prefix + "/ffnn_ws", hp.bilstm_output_dim(), kBoundaryTagCount, Activation::linear),
        ffnn_sw_(store, prefix + "/ffnn_sw", 2 * hp.bilstm_output_dim(), hp.ffnn_dim, Activation::tanh),
        bilstm_pos_(store, prefix + "/bilstm_pos", hp.word_input_dim(), hp.lstm_hidden, hp.lstm_layers),
        ffnn_pos_(store, prefix + "/ffnn_pos", hp.bilstm_output_dim(), std::max<std::size_t>(vocab.pos_tags.size(), 1),
                  Activation::linear),
        bilstm_dep_(store, prefix + "/bilstm_dep", hp.parser_input_dim(), hp.lstm_hidden, hp.lstm_layers) {
    tables_.syllables = &store.add(prefix + "/emb/syllable", {vocab.syllables.size(), hp.syllable_dim},
                                   Initializer::embedding_uniform);
    if (!hp.flags.no_initial_bio) {
      tables_.boundaries = &store.add(prefix + "/emb/boundary", {kBoundaryTagCount, hp.boundary_dim},
                                      Initializer::embedding_uniform);
    }
    tables_.words = &store.add(prefix + "/emb/word", {vocab.words.size(), hp.word_dim},
                               Initializer::embedding_uniform);
    if (!hp.flags.no_pos_embedding) {
      tables_.pos_tags = &store.add(prefix + "/emb/pos", {std::max<std::size_t>(vocab.pos_tags.size(), 1), hp.pos_dim},
                                    Initializer::embedding_uniform);
    }
    tables_.root = &store.add(prefix + "/emb/root", {1, hp.parser_input_dim()}, Initializer::embedding_uniform);
    if (bilstm_ws_.input_dim() != hp.syllable_input_dim() || ffnn_sw_.output_dim() != hp.ffnn_dim ||
        bilstm_pos_.input_dim() != hp.word_dim + ffnn_sw_.output_dim() ||
        bilstm_dep_.input_dim() != bilstm_pos_.input_dim() + (tables_.pos_tags ? hp.pos_dim : 0)) {
      throw ShapeError("encoder: inconsistent layer widths");
    }
  }

  // v_i = e^(S)[s_i] ; e^(B)[b_i], or e^(S)[s_i] alone without initial tags.
  std::vector<ad::Expr> syllable_vectors(ad::Graph& g, std::span<const std::string> syllables,
                                         std::span<const BoundaryTag> initial,
                                         ForwardContext& ctx) const {
    if (initial.size() != syllables.size()) throw ShapeError("syllable_vectors: tag count mismatch");
    std::vector<ad::Expr> out;
    out.reserve(syllables.size());
    for (std::size_t i = 0; i < syllables.size(); ++i) {
      const std::size_t id = token_id(vocab_->syllables, syllables[i], ctx);
      const ad::Expr syl = g.lookup(*tables_.syllables, id);
      if (tables_.boundaries) {
        out.push_back(ad::concat({syl, g.lookup(*tables_.boundaries, static_cast<std::size_t>(initial[i]))}));
      } else {
        out.push_back(syl);
      }
    }
    return out;
  }

  // r^(ws): top-layer [forward; backward] states of the segmentation BiLSTM.
  std::vector<ad::Expr> wseg_states(ad::Graph& g, std::span<const ad::Expr> v, ForwardContext& ctx) const {
    return bilstm_ws_.transduce(g, with_dropout(v, ctx));
  }

  // h^(ws): boundary-tag scores per syllable.
  std::vector<ad::Expr> wseg_emissions(ad::Graph& g, std::span<const ad::Expr> states,
                                       ForwardContext& ctx) const {
    std::vector<ad::Expr> out;
    out.reserve(states.size());
    for (const ad::Expr& r : states) out.push_back(ffnn_ws_(g, dropout(r, ctx)));
    return out;
  }

  // x_j = e^(W)[w_j] ; FFNN_sw(r_first(j) ; r_last(j)).
  std::vector<ad::Expr> word_vectors(ad::Graph& g, std::span<const std::string> syllables,
                                     std::span<const WordSpan> words,
                                     std::span<const ad::Expr> wseg_states, ForwardContext& ctx) const {
    if (!is_partition(words, syllables.size()) || wseg_states.size() != syllables.size()) {
      throw ShapeError("word_vectors: word spans do not partition the syllables");
    }
    std::vector<ad::Expr> out;
    out.reserve(words.size());
    for (const WordSpan& w : words) {
      const std::size_t id = token_id(vocab_->words, join_syllables(syllables, w), ctx);
      const ad::Expr composed =
          ffnn_sw_(g, dropout(ad::concat({wseg_states[w.first], wseg_states[w.last]}), ctx));
      out.push_back(ad::concat({g.lookup(*tables_.words, id), composed}));
    }
    return out;
  }

  PosStates pos_states(ad::Graph& g, std::span<const ad::Expr> x, ForwardContext& ctx) const {
    PosStates out;
    out.states = bilstm_pos_.transduce(g, with_dropout(x, ctx));
    out.emissions.reserve(out.states.size());
    for (const ad::Expr& r : out.states) out.emissions.push_back(ffnn_pos_(g, dropout(r, ctx)));
    return out;
  }

  // r^(dep) for the root (index 0) followed by the words. The parser input
  // is z_j = x_j ; e^(P)[p_j], or x_j alone without POS embeddings.
  std::vector<ad::Expr> dep_states(ad::Graph& g, std::span<const ad::Expr> x,
                                   std::span<const std::size_t> pos, ForwardContext& ctx) const {
    std::vector<ad::Expr> z;
    z.reserve(x.size() + 1);
    z.push_back(g.lookup(*tables_.root, 0));
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (tables_.pos_tags) {
        if (pos.size() != x.size()) throw ShapeError("dep_states: POS tag count mismatch");
        z.push_back(ad::concat({x[j], g.lookup(*tables_.pos_tags, pos[j])}));
      } else {
        z.push_back(x[j]);
      }
    }
    return bilstm_dep_.transduce(g, with_dropout(z, ctx));
  }

  const EmbeddingTables& tables() const { return tables_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  const ModelVocabulary& vocabulary() const { return *vocab_; }

 private:
  static std::vector<ad::Expr> with_dropout(std::span<const ad::Expr> xs, ForwardContext& ctx) {
    std::vector<ad::Expr> out;
    out.reserve(xs.size());
    for (const ad::Expr& x : xs) out.push_back(dropout(x, ctx));
    return out;
  }

  Hyperparameters hp_;
  const ModelVocabulary* vocab_;
  EmbeddingTables tables_;
  BiLstm bilstm_ws_;
  Dense ffnn_ws_;
  Dense ffnn_sw_;
  BiLstm bilstm_pos_;
  Dense ffnn_pos_;
  BiLstm bilstm_dep_;
};

}  // namespace sylparse
