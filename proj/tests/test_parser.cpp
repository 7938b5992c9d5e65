#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace sylparse;
using ad::Expr;
using ad::Graph;

namespace {

Tensor random_scores(std::mt19937_64& rng, std::size_t n) {
  return oracle::random_tensor(rng, {n + 1, n + 1}, -5.0, 5.0);
}

// A projection/scorer stack over parameterised parser states.
struct ParserFixture {
  ParameterStore store;
  ProjectionHeads heads;
  std::vector<Parameter*> states;

  ParserFixture(std::size_t n, std::size_t input, std::size_t proj, std::size_t labels, std::uint64_t seed)
      : store(seed), heads(store, "parser", input, proj, labels) {
    for (std::size_t i = 0; i <= n; ++i) {
      states.push_back(&store.add("state" + std::to_string(i), {input}, Initializer::embedding_uniform));
    }
  }

  ArcScores score(Graph& g) {
    std::vector<Expr> xs;
    for (Parameter* p : states) xs.push_back(g.parameter(*p));
    ForwardContext ctx;
    return heads.score_arcs(g, xs, ctx);
  }
};

std::vector<std::size_t> random_tree(std::mt19937_64& rng, std::size_t n) {
  const auto& trees = oracle::projective_trees(n);
  return trees[rng() % trees.size()];
}

}  // namespace

TEST(Eisner, SingleWord) {
  EXPECT_EQ(eisner_decode(Tensor({2, 2}, 3.0)), std::vector<std::size_t>{0});
}

TEST(Eisner, FavouredChain) {
  Tensor s({4, 4});
  s.at(0, 1) = s.at(1, 2) = s.at(2, 3) = 10.0;
  EXPECT_EQ(eisner_decode(s), (std::vector<std::size_t>{0, 1, 2}));
  double best = -1e300;
  std::vector<std::size_t> arg;
  for (const auto& t : oracle::projective_trees(3)) {
    if (oracle::tree_score(s, t) > best) {
      best = oracle::tree_score(s, t);
      arg = t;
    }
  }
  EXPECT_EQ(arg, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Eisner, RootMayTakeSeveralChildren) {
  Tensor s({4, 4}, -1.0);
  s.at(0, 1) = s.at(0, 2) = s.at(0, 3) = 5.0;
  EXPECT_EQ(eisner_decode(s), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Eisner, MatchesProjectiveEnumeration) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const Tensor s = random_scores(rng, n);
    const auto heads = eisner_decode(s);
    EXPECT_TRUE(oracle::is_tree(heads));
    EXPECT_TRUE(oracle::is_projective(heads));
    EXPECT_NEAR(tree_score(s, heads), oracle::best_projective_score(s), 1e-9);
  }
}

TEST(Eisner, AlwaysProjectiveUpToTwelveWords) {
  std::mt19937_64 rng(8);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto heads = eisner_decode(random_scores(rng, n));
      ASSERT_EQ(heads.size(), n);
      EXPECT_TRUE(oracle::is_tree(heads));
      EXPECT_TRUE(oracle::is_projective(heads));
    }
  }
}

TEST(Eisner, UniformShiftKeepsTheTree) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 9;
    const Tensor s = random_scores(rng, n);
    Tensor shifted = s;
    for (double& x : shifted.data()) x += 3.25;
    const auto a = eisner_decode(s), b = eisner_decode(shifted);
    EXPECT_EQ(a, b);
    EXPECT_NEAR(tree_score(shifted, b), tree_score(s, a) + 3.25 * static_cast<double>(n), 1e-9);
  }
}

TEST(Eisner, RejectsBadMatrices) {
  EXPECT_THROW(eisner_decode(Tensor({1, 1})), ShapeError);
  EXPECT_THROW(eisner_decode(Tensor({3, 2})), ShapeError);
}

TEST(ArcScorer, ZeroWeightsGiveZeroScores) {
  ParserFixture f(3, 4, 3, 2, 1);
  for (auto& [name, p] : f.store) {
    if (name.rfind("parser", 0) == 0) p.value.fill(0.0);
  }
  Graph g;
  EXPECT_EQ(f.score(g).matrix, Tensor({4, 4}));
}

TEST(ArcScorer, GradientsMatchFiniteDifferences) {
  ParserFixture f(3, 4, 3, 2, 2);
  std::mt19937_64 rng(3);
  const Tensor probe = oracle::random_tensor(rng, {16});
  auto loss = [&](Graph& g) {
    const ArcScores a = f.score(g);
    std::vector<Expr> terms;
    for (std::size_t h = 0; h <= 3; ++h) {
      for (std::size_t d = 1; d <= 3; ++d) {
        if (h != d) terms.push_back(ad::scale(a.arc(h, d), probe[h * 4 + d]));
      }
    }
    return ad::sum(ad::sum(terms));
  };
  EXPECT_LE(oracle::check_gradients(f.store, loss).max_relative_error, 1e-4);
}

TEST(ArcHinge, InactiveWhenGoldWinsByTheMargin) {
  ParameterStore store;
  Graph g;
  ArcScores a;
  a.words = 3;
  a.arcs.resize(16);
  a.matrix = Tensor({4, 4});
  Parameter& s = store.add("s", {16}, Initializer::zeros);
  const std::vector<std::size_t> gold{2, 0, 2};
  for (std::size_t h = 0; h <= 3; ++h) {
    for (std::size_t d = 1; d <= 3; ++d) {
      if (h == d) continue;
      s.value[h * 4 + d] = gold[d - 1] == h ? 5.0 : 0.0;
    }
  }
  Expr all = g.parameter(s);
  for (std::size_t h = 0; h <= 3; ++h) {
    for (std::size_t d = 1; d <= 3; ++d) {
      if (h == d) continue;
      a.arcs[h * 4 + d] = ad::pick(all, h * 4 + d);
      a.matrix.at(h, d) = s.value[h * 4 + d];
    }
  }
  const Expr loss = arc_hinge_loss(g, a, gold);
  EXPECT_EQ(loss.scalar(), 0.0);
  g.backward(loss);
  for (double x : s.grad.data()) EXPECT_EQ(x, 0.0);
}

TEST(ArcHinge, TwoWordHandComputedGap) {
  // Trees for n = 2: {0,0}, {0,1}, {2,0}. Gold {0,1} scores 1 + 1 = 2.
  Graph g;
  ArcScores a;
  a.words = 2;
  a.arcs.resize(9);
  a.matrix = Tensor({3, 3});
  auto set = [&](std::size_t h, std::size_t d, double v) {
    a.matrix.at(h, d) = v;
    a.arcs[h * 3 + d] = g.constant(Tensor::scalar(v));
  };
  set(0, 1, 1.0);
  set(1, 2, 1.0);
  set(0, 2, 4.0);
  set(2, 1, 0.0);
  // With +1 on non-gold arcs: {0,0} = 1 + 5 = 6 and {2,0} = 1 + 5 = 6.
  // Either way the violation is 6 - 2 = 4.
  const Expr loss = arc_hinge_loss(g, a, std::vector<std::size_t>{0, 1});
  EXPECT_DOUBLE_EQ(loss.scalar(), 4.0);
}

TEST(ArcHinge, NonNegativeAndZeroImpliesGoldDecode) {
  std::mt19937_64 rng(10);
  int zero_cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const auto gold = random_tree(rng, n);
    Tensor s = random_scores(rng, n);
    if (trial % 2 == 0) {
      for (std::size_t d = 1; d <= n; ++d) s.at(gold[d - 1], d) += 8.0;
    }
    Graph g;
    ArcScores a;
    a.words = n;
    a.arcs.resize((n + 1) * (n + 1));
    a.matrix = s;
    for (std::size_t h = 0; h <= n; ++h) {
      for (std::size_t d = 1; d <= n; ++d) {
        if (h != d) a.arcs[h * (n + 1) + d] = g.constant(Tensor::scalar(s.at(h, d)));
      }
    }
    const double loss = arc_hinge_loss(g, a, gold).scalar();
    EXPECT_GE(loss, 0.0);
    if (loss == 0.0) {
      ++zero_cases;
      EXPECT_EQ(eisner_decode(s), gold);
    }
  }
  EXPECT_GT(zero_cases, 0);
}

TEST(ArcHinge, GradientsMatchFiniteDifferencesAtAnActivePoint) {
  ParserFixture f(4, 5, 4, 3, 3);
  const std::vector<std::size_t> gold{2, 0, 4, 2};
  {
    Graph g;
    ASSERT_GT(arc_hinge_loss(g, f.score(g), gold).scalar(), 0.0);
  }
  auto loss = [&](Graph& g) { return arc_hinge_loss(g, f.score(g), gold); };
  EXPECT_LE(oracle::check_gradients(f.store, loss).max_relative_error, 1e-4);
}

TEST(LabelLoss, ZeroLogitsGiveLogLabelCount) {
  ParserFixture f(1, 3, 2, 2, 4);
  for (auto& [name, p] : f.store) {
    if (name.find("label_scorer/out") != std::string::npos) p.value.fill(0.0);
  }
  Graph g;
  const ArcScores a = f.score(g);
  EXPECT_NEAR(label_loss(g, f.heads, a, std::vector<std::size_t>{0}, std::vector<std::size_t>{1}).scalar(),
              std::log(2.0), 1e-12);
}

TEST(LabelLoss, StrongGoldLogitGivesNearZeroLoss) {
  ParserFixture f(1, 3, 2, 2, 5);
  f.store.at("parser/label_scorer/out_W").value.fill(0.0);
  f.store.at("parser/label_scorer/out_b").value = Tensor::vector({-30.0, 30.0});
  Graph g;
  const ArcScores a = f.score(g);
  const std::vector<std::size_t> heads{0};
  EXPECT_LT(label_loss(g, f.heads, a, heads, std::vector<std::size_t>{1}).scalar(), 1e-20);
  EXPECT_EQ(predict_labels(g, f.heads, a, heads), std::vector<std::size_t>{1});
}

TEST(LabelLoss, GradientsMatchFiniteDifferences) {
  ParserFixture f(3, 4, 3, 3, 6);
  const std::vector<std::size_t> heads{2, 0, 2}, labels{0, 2, 1};
  auto loss = [&](Graph& g) { return label_loss(g, f.heads, f.score(g), heads, labels); };
  EXPECT_LE(oracle::check_gradients(f.store, loss).max_relative_error, 1e-4);
}
