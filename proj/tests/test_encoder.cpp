#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace sylparse;
using ad::Expr;
using ad::Graph;
using Syls = std::vector<std::string>;

namespace {

ModelVocabulary small_vocab() {
  ModelVocabulary v;
  for (const char* s : {"Tôi", "là", "sinh", "viên"}) v.syllables.add(s, 2);
  for (const char* w : {"Tôi", "là", "sinh_viên"}) v.words.add(w, 1);
  for (const char* t : {"N", "P", "V"}) v.pos_tags.add(t);
  for (const char* l : {"root", "sub", "vmod"}) v.labels.add(l);
  return v;
}

Hyperparameters tiny() {
  Hyperparameters hp;
  hp.syllable_dim = 4;
  hp.boundary_dim = 2;
  hp.word_dim = 3;
  hp.pos_dim = 2;
  hp.lstm_hidden = 3;
  hp.lstm_layers = 2;
  hp.ffnn_dim = 5;
  return hp;
}

std::vector<Expr> constants(Graph& g, std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(g.constant(oracle::random_tensor(rng, {dim})));
  return out;
}

const Syls kSentence{"Tôi", "là", "sinh", "viên"};
const std::vector<WordSpan> kWords{{0, 0}, {1, 1}, {2, 3}};
const std::vector<BoundaryTag> kInitial{BoundaryTag::B, BoundaryTag::B, BoundaryTag::B, BoundaryTag::I};

}  // namespace

TEST(Widths, DefaultDimensions) {
  Hyperparameters hp;
  EXPECT_EQ(hp.syllable_input_dim(), 125u);
  EXPECT_EQ(hp.word_input_dim(), 200u);
  EXPECT_EQ(hp.parser_input_dim(), 300u);
  hp.flags.no_initial_bio = true;
  hp.flags.no_pos_embedding = true;
  EXPECT_EQ(hp.syllable_input_dim(), 100u);
  EXPECT_EQ(hp.parser_input_dim(), 200u);
}

TEST(Widths, LayerShapesFollowEveryFlagCombination) {
  const ModelVocabulary vocab = small_vocab();
  for (int mask = 0; mask < 4; ++mask) {
    Hyperparameters hp;
    hp.flags.no_initial_bio = mask & 1;
    hp.flags.no_pos_embedding = mask & 2;
    ParameterStore store;
    Encoder enc(store, "e", hp, vocab);
    const std::size_t h = hp.lstm_hidden;
    EXPECT_EQ(store.at("e/bilstm_ws/l0/fwd/W").value.cols(), hp.syllable_input_dim() + h);
    EXPECT_EQ(store.at("e/bilstm_pos/l0/fwd/W").value.cols(), 200 + h);
    EXPECT_EQ(store.at("e/bilstm_dep/l0/fwd/W").value.cols(), hp.parser_input_dim() + h);
    EXPECT_EQ(store.contains("e/emb/boundary"), !hp.flags.no_initial_bio);
    EXPECT_EQ(store.contains("e/emb/pos"), !hp.flags.no_pos_embedding);

    Graph g;
    ForwardContext ctx;
    const auto v = enc.syllable_vectors(g, kSentence, kInitial, ctx);
    EXPECT_EQ(v[0].dim(), hp.flags.no_initial_bio ? 100u : 125u);
    const auto x = enc.word_vectors(g, kSentence, kWords, enc.wseg_states(g, v, ctx), ctx);
    EXPECT_EQ(x[2].dim(), 200u);
  }
}

TEST(SyllableVectors, ConcatenateTableRows) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(3);
  Encoder enc(store, "e", tiny(), vocab);
  Graph g;
  ForwardContext ctx;
  const Syls syl{"sinh", "zzz"};
  const std::vector<BoundaryTag> tags{BoundaryTag::B, BoundaryTag::I};
  const auto v = enc.syllable_vectors(g, syl, tags, ctx);
  const Tensor& table = store.at("e/emb/syllable").value;
  const Tensor& boundary = store.at("e/emb/boundary").value;
  auto expect_concat = [&](const Tensor& got, std::size_t syl_row, std::size_t tag_row) {
    std::vector<double> want(table.row(syl_row).begin(), table.row(syl_row).end());
    want.insert(want.end(), boundary.row(tag_row).begin(), boundary.row(tag_row).end());
    EXPECT_EQ(got, Tensor::vector(want));
  };
  expect_concat(v[0].value(), vocab.syllables.id("sinh"), 0);
  expect_concat(v[1].value(), Vocabulary::kUnknown, 1);
}

TEST(WsegStates, ZeroWeightsGiveZeroStates) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store;
  Encoder enc(store, "e", tiny(), vocab);
  for (auto& [name, p] : store) {
    if (name.find("bilstm_ws") != std::string::npos) p.value.fill(0.0);
  }
  Graph g;
  ForwardContext ctx;
  for (const Expr& r : enc.wseg_states(g, enc.syllable_vectors(g, kSentence, kInitial, ctx), ctx)) {
    EXPECT_EQ(r.value(), Tensor({6}));
  }
}

TEST(BiLstm, EqualsExplicitForwardAndBackwardRuns) {
  std::mt19937_64 rng(5);
  for (std::size_t m = 1; m <= 4; ++m) {
    ParameterStore a(9), b(9);
    BiLstm bi(a, "l", 3, 4, 1);
    LstmLayer fwd(b, "l/l0/fwd", 3, 4), bwd(b, "l/l0/bwd", 3, 4);
    Graph g;
    const auto xs = constants(g, rng, m, 3);
    const auto out = bi.transduce(g, xs);
    const auto f = fwd.run(g, xs, false), r = bwd.run(g, xs, true);
    for (std::size_t i = 0; i < m; ++i) EXPECT_EQ(out[i].value(), ad::concat({f[i], r[i]}).value());
  }
}

TEST(BiLstm, ReversalSwapsHalvesWhenDirectionsShareWeights) {
  std::mt19937_64 rng(6);
  ParameterStore store(4);
  BiLstm bi(store, "l", 3, 4, 1);
  store.at("l/l0/bwd/W").value = store.at("l/l0/fwd/W").value;
  store.at("l/l0/bwd/b").value = store.at("l/l0/fwd/b").value;
  Graph g;
  auto xs = constants(g, rng, 5, 3);
  const auto out = bi.transduce(g, xs);
  std::reverse(xs.begin(), xs.end());
  const auto rev = bi.transduce(g, xs);
  for (std::size_t i = 0; i < 5; ++i) {
    const Expr o = out[4 - i];
    EXPECT_EQ(rev[i].value(), ad::concat({ad::slice(o, 4, 8), ad::slice(o, 0, 4)}).value());
  }
}

TEST(WsegStates, EveryPositionSeesEverySyllable) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(12);
  Encoder enc(store, "e", tiny(), vocab);
  ForwardContext ctx;
  for (std::size_t i = 0; i < kSentence.size(); ++i) {
    Syls changed = kSentence;
    changed[i] = "là" == kSentence[i] ? "Tôi" : "là";
    Graph g;
    const auto a = enc.wseg_states(g, enc.syllable_vectors(g, kSentence, kInitial, ctx), ctx);
    const auto b = enc.wseg_states(g, enc.syllable_vectors(g, changed, kInitial, ctx), ctx);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NE(a[k].value(), b[k].value()) << i << " " << k;
  }
}

TEST(WordVectors, ComposeFirstAndLastSyllableStates) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(13);
  Encoder enc(store, "e", tiny(), vocab);
  Graph g;
  ForwardContext ctx;
  const auto r = enc.wseg_states(g, enc.syllable_vectors(g, kSentence, kInitial, ctx), ctx);
  const std::vector<WordSpan> words{{0, 0}, {1, 1}, {2, 3}};
  const Syls with_unknown{"Tôi", "là", "viên", "sinh"};
  const auto x = enc.word_vectors(g, kSentence, words, r, ctx);
  const auto xu = enc.word_vectors(g, with_unknown, words, r, ctx);
  Expr w = g.parameter(store.at("e/ffnn_sw/W")), b = g.parameter(store.at("e/ffnn_sw/b"));
  auto composed = [&](std::size_t f, std::size_t l) { return ad::tanh(ad::affine(w, ad::concat({r[f], r[l]}), b)); };
  auto word_row = [&](std::size_t id) { return g.lookup(store.at("e/emb/word"), id); };
  EXPECT_EQ(x[0].value(), ad::concat({word_row(vocab.words.id("Tôi")), composed(0, 0)}).value());
  EXPECT_EQ(x[2].value(), ad::concat({word_row(vocab.words.id("sinh_viên")), composed(2, 3)}).value());
  EXPECT_EQ(xu[2].value(), ad::concat({word_row(Vocabulary::kUnknown), composed(2, 3)}).value());
  EXPECT_THROW(enc.word_vectors(g, kSentence, std::vector<WordSpan>{{0, 1}}, r, ctx), ShapeError);
}

TEST(PosStates, ZeroWeightsGiveUniformEmissions) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(14);
  Encoder enc(store, "e", tiny(), vocab);
  store.at("e/ffnn_pos/W").value.fill(0.0);
  Graph g;
  ForwardContext ctx;
  std::mt19937_64 rng(1);
  const auto pos = enc.pos_states(g, constants(g, rng, 1, 8), ctx);
  ASSERT_EQ(pos.emissions.size(), 1u);
  EXPECT_EQ(pos.emissions[0].value(), Tensor({3}));
}

TEST(PosStates, EmissionGradientsMatchFiniteDifferences) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(15);
  Encoder enc(store, "e", tiny(), vocab);
  std::mt19937_64 rng(2);
  const Tensor probe = oracle::random_tensor(rng, {9});
  auto loss = [&](Graph& g) {
    ForwardContext ctx;
    const auto r = enc.wseg_states(g, enc.syllable_vectors(g, kSentence, kInitial, ctx), ctx);
    const auto x = enc.word_vectors(g, kSentence, kWords, r, ctx);
    std::vector<Expr> terms;
    const auto pos = enc.pos_states(g, x, ctx);
    for (std::size_t j = 0; j < 3; ++j) {
      terms.push_back(ad::dot(pos.emissions[j], g.constant(Tensor::vector({probe[3 * j], probe[3 * j + 1], probe[3 * j + 2]}))));
    }
    return ad::sum(terms);
  };
  EXPECT_LE(oracle::check_gradients(store, loss).max_relative_error, 1e-4);
}

TEST(DepStates, RootIsPrependedAndTagsMatter) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(16);
  Encoder enc(store, "e", tiny(), vocab);
  Graph g;
  ForwardContext ctx;
  std::mt19937_64 rng(3);
  const auto x = constants(g, rng, 1, 8);
  const auto a = enc.dep_states(g, x, std::vector<std::size_t>{0}, ctx);
  const auto b = enc.dep_states(g, x, std::vector<std::size_t>{2}, ctx);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NE(a[1].value(), b[1].value());
}

TEST(DepStates, NoPosEmbeddingIgnoresTags) {
  const ModelVocabulary vocab = small_vocab();
  Hyperparameters hp = tiny();
  hp.flags.no_pos_embedding = true;
  ParameterStore store(17);
  Encoder enc(store, "e", hp, vocab);
  Graph g;
  ForwardContext ctx;
  std::mt19937_64 rng(4);
  const auto x = constants(g, rng, 2, 8);
  const auto a = enc.dep_states(g, x, std::vector<std::size_t>{0, 1}, ctx);
  const auto b = enc.dep_states(g, x, std::vector<std::size_t>{2, 2}, ctx);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value(), b[i].value());
  EXPECT_EQ(store.at("e/emb/root").value.cols(), 8u);
}

TEST(Encoder, DecodingIsDeterministic) {
  const ModelVocabulary vocab = small_vocab();
  ParameterStore store(18);
  Encoder enc(store, "e", tiny(), vocab);
  std::mt19937_64 rng(1);
  ForwardContext ctx;
  ctx.keep_probability = 0.5;
  ctx.word_dropout_alpha = 0.25;
  ctx.rng = &rng;  // training is off, so neither may draw
  Graph g;
  const auto a = enc.wseg_states(g, enc.syllable_vectors(g, kSentence, kInitial, ctx), ctx);
  const auto b = enc.wseg_states(g, enc.syllable_vectors(g, kSentence, kInitial, ctx), ctx);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value(), b[i].value());
}

TEST(WordDropout, Probabilities) {
  EXPECT_DOUBLE_EQ(word_dropout_probability(1), 0.2);
  EXPECT_NEAR(word_dropout_probability(3), 1.0 / 13.0, 1e-15);
  double prev = 1.0;
  for (std::size_t c = 1; c < 10000; c *= 3) {
    EXPECT_LT(word_dropout_probability(c), prev);
    prev = word_dropout_probability(c);
  }
  EXPECT_LT(word_dropout_probability(1000000000), 1e-9);
  EXPECT_THROW(word_dropout_probability(0), std::invalid_argument);
}

TEST(WordDropout, EmpiricalFrequencyAndAlphaZero) {
  Vocabulary v;
  v.add("once", 1);
  v.add("thrice", 3);
  std::mt19937_64 rng(77);
  ForwardContext ctx;
  ctx.training = true;
  ctx.word_dropout_alpha = 0.25;
  ctx.rng = &rng;
  int once = 0, thrice = 0;
  for (int i = 0; i < 100000; ++i) {
    once += token_id(v, "once", ctx) == Vocabulary::kUnknown;
    thrice += token_id(v, "thrice", ctx) == Vocabulary::kUnknown;
  }
  EXPECT_NEAR(once / 1e5, 0.2, 0.01);
  EXPECT_NEAR(thrice / 1e5, 1.0 / 13.0, 0.01);
  ctx.word_dropout_alpha = 0.0;
  for (int i = 0; i < 10000; ++i) EXPECT_NE(token_id(v, "once", ctx), Vocabulary::kUnknown);
}
