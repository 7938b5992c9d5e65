#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sylparse/context.hpp"
#include "sylparse/crf.hpp"
#include "sylparse/encoder.hpp"
#include "sylparse/hyperparameters.hpp"
#include "sylparse/lexicon.hpp"
#include "sylparse/parser.hpp"
#include "sylparse/vocab.hpp"

namespace sylparse {

enum class Task { segmentation, tagging, parsing };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::segmentation: return "segmentation";
    case Task::tagging: return "tagging";
    case Task::parsing: return "parsing";
  }
  return "?";
}

// One complete encoder + CRFs + parser. The joint model has one; the
// pipeline baseline has one per task, each trained on its own loss only.
class Network {
 public:
  Network(ParameterStore& store, const std::string& prefix, const Hyperparameters& hp,
          const ModelVocabulary& vocab)
      : encoder_(store, prefix, hp, vocab),
        parser_(store, prefix + "/parser", hp.bilstm_output_dim(), hp.ffnn_dim,
                std::max<std::size_t>(vocab.labels.size(), 1)) {
    if (!hp.flags.softmax_wseg) {
      wseg_transitions_ = &add_crf_transitions(store, prefix + "/crf_ws", kBoundaryTagCount);
    }
    if (!hp.flags.softmax_pos) {
      pos_transitions_ = &add_crf_transitions(store, prefix + "/crf_pos",
                                              std::max<std::size_t>(vocab.pos_tags.size(), 1));
    }
  }

  const Encoder& encoder() const { return encoder_; }
  const ProjectionHeads& parser() const { return parser_; }
  // Null under the corresponding softmax ablation.
  Parameter* wseg_transitions() const { return wseg_transitions_; }
  Parameter* pos_transitions() const { return pos_transitions_; }

  // Segmentation (or tagging) loss from emissions: CRF NLL, or the softmax
  // ablation when no transition table exists.
  ad::Expr sequence_loss(ad::Graph& g, std::span<const ad::Expr> emissions,
                         std::span<const std::size_t> gold, Parameter* transitions) const {
    if (!transitions) return softmax_nll(emissions, gold);
    return crf_nll(g, emissions, g.parameter(*transitions), gold);
  }

  static std::vector<std::size_t> decode_sequence(std::span<const ad::Expr> emissions,
                                                  const Parameter* transitions) {
    const Tensor em = emission_matrix(emissions);
    return transitions ? viterbi(em, transitions->value) : argmax_tags(em);
  }

 private:
  Encoder encoder_;
  ProjectionHeads parser_;
  Parameter* wseg_transitions_ = nullptr;
  Parameter* pos_transitions_ = nullptr;
};

// Trained (or trainable) model: hyperparameters, inventories, lexicon,
// parameters and the networks built over them. Movable; parameter and
// vocabulary addresses are stable across moves.
class JointModel {
 public:
  JointModel(Hyperparameters hp, ModelVocabulary vocab, Lexicon lexicon, std::uint64_t seed)
      : state_(std::make_unique<State>(hp, std::move(vocab), std::move(lexicon), seed)) {
    if (hp.flags.pipeline) {
      for (const char* prefix : {"wseg", "pos", "dep"}) {
        state_->networks.emplace_back(state_->store, prefix, state_->hp, state_->vocab);
      }
    } else {
      state_->networks.emplace_back(state_->store, "joint", state_->hp, state_->vocab);
    }
  }

  const Hyperparameters& hyperparameters() const { return state_->hp; }
  const ModelVocabulary& vocabulary() const { return state_->vocab; }
  const Lexicon& lexicon() const { return state_->lexicon; }
  // Replaces the lexicon used for initial tags, e.g. with an external one.
  void set_lexicon(Lexicon lexicon) { state_->lexicon = std::move(lexicon); }
  ParameterStore& parameters() { return state_->store; }
  const ParameterStore& parameters() const { return state_->store; }
  std::size_t network_count() const { return state_->networks.size(); }

  const Network& network(Task task) const {
    if (state_->networks.size() == 1) return state_->networks.front();
    return state_->networks.at(static_cast<std::size_t>(task));
  }

  // Full decode of one syllable sequence: longest-match initial tags,
  // segmentation (skipped when `gold_words` is given), POS tagging,
  // projective parsing and arc labelling. `repairs` receives the number of
  // promoted I tags.
  AnnotatedSentence predict(std::span<const std::string> syllables,
                            const std::vector<WordSpan>* gold_words = nullptr,
                            std::size_t* repairs = nullptr) const {
    if (syllables.empty()) throw std::invalid_argument("predict: empty sentence");
    ad::Graph g(ad::GradientMode::frozen);
    ForwardContext ctx;
    const auto initial = initial_tags(syllables, state_->lexicon);

    std::vector<std::pair<const Network*, std::vector<ad::Expr>>> encoded;
    auto syllable_states = [&](const Network& net) -> const std::vector<ad::Expr>& {
      for (const auto& [n, states] : encoded) {
        if (n == &net) return states;
      }
      const auto v = net.encoder().syllable_vectors(g, syllables, initial, ctx);
      encoded.emplace_back(&net, net.encoder().wseg_states(g, v, ctx));
      return encoded.back().second;
    };

    AnnotatedSentence out;
    out.syllables.assign(syllables.begin(), syllables.end());
    if (gold_words) {
      if (!is_partition(*gold_words, syllables.size())) {
        throw std::invalid_argument("predict: gold segmentation does not cover the sentence");
      }
      out.words = *gold_words;
    } else {
      const Network& ws = network(Task::segmentation);
      const auto emissions = ws.encoder().wseg_emissions(g, syllable_states(ws), ctx);
      const auto ids = Network::decode_sequence(emissions, ws.wseg_transitions());
      std::vector<BoundaryTag> tags;
      tags.reserve(ids.size());
      for (std::size_t id : ids) tags.push_back(static_cast<BoundaryTag>(id));
      auto decoded = spans_from_tags(tags);
      if (repairs) *repairs += decoded.repairs;
      out.words = std::move(decoded.words);
    }
    out.boundary_tags = tags_from_spans(*out.words, syllables.size());

    const Network& tn = network(Task::tagging);
    const auto x = tn.encoder().word_vectors(g, syllables, *out.words, syllable_states(tn), ctx);
    const auto pos = tn.encoder().pos_states(g, x, ctx);
    const auto pos_ids = Network::decode_sequence(pos.emissions, tn.pos_transitions());
    out.pos_tags.emplace();
    for (std::size_t id : pos_ids) out.pos_tags->push_back(state_->vocab.pos_tags.label(id));

    const Network& dn = network(Task::parsing);
    const auto x_dep = &dn == &tn ? x
                                  : dn.encoder().word_vectors(g, syllables, *out.words,
                                                              syllable_states(dn), ctx);
    const auto dep = dn.encoder().dep_states(g, x_dep, pos_ids, ctx);
    const ArcScores arcs = dn.parser().score_arcs(g, dep, ctx);
    out.heads = eisner_decode(arcs.matrix);
    const auto labels = predict_labels(g, dn.parser(), arcs, *out.heads);
    out.deprels.emplace();
    for (std::size_t id : labels) out.deprels->push_back(state_->vocab.labels.label(id));
    return out;
  }

 private:
  struct State {
    State(Hyperparameters h, ModelVocabulary v, Lexicon l, std::uint64_t seed)
        : hp(h), vocab(std::move(v)), lexicon(std::move(l)), store(seed) {}
    Hyperparameters hp;
    ModelVocabulary vocab;
    Lexicon lexicon;
    ParameterStore store;
    std::vector<Network> networks;
  };
  std::unique_ptr<State> state_;
};

}  // namespace sylparse
