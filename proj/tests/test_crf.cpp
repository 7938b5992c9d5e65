#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace sylparse;
using ad::Expr;
using ad::Graph;

namespace {

// Emission rows e0..e{n-1} and the transition table as parameters.
struct CrfFixture {
  ParameterStore store;
  std::vector<Parameter*> rows;
  Parameter* trans = nullptr;

  CrfFixture(const Tensor& em, const Tensor& transitions) {
    for (std::size_t t = 0; t < em.rows(); ++t) {
      Parameter& p = store.add("e" + std::to_string(t), {em.cols()}, Initializer::zeros);
      std::copy(em.row(t).begin(), em.row(t).end(), p.value.data().begin());
      rows.push_back(&p);
    }
    trans = &add_crf_transitions(store, "trans", em.cols());
    for (std::size_t r = 0; r < em.cols() + 2; ++r) {
      for (std::size_t c = 0; c < em.cols() + 2; ++c) {
        if (trans->value.at(r, c) != kMaskedTransition) trans->value.at(r, c) = transitions.at(r, c);
      }
    }
  }

  std::vector<Expr> emissions(Graph& g) {
    std::vector<Expr> out;
    for (Parameter* p : rows) out.push_back(g.parameter(*p));
    return out;
  }

  double nll(const std::vector<std::size_t>& gold) {
    Graph g;
    return crf_nll(g, emissions(g), g.parameter(*trans), gold).scalar();
  }
};

Tensor random_transitions(std::mt19937_64& rng, std::size_t tags) {
  return oracle::random_tensor(rng, {tags + 2, tags + 2}, -2.0, 2.0);
}

}  // namespace

TEST(CrfNll, SingleTagHasZeroLoss) {
  std::mt19937_64 rng(1);
  CrfFixture f(oracle::random_tensor(rng, {4, 1}), Tensor({3, 3}));
  EXPECT_NEAR(f.nll({0, 0, 0, 0}), 0.0, 1e-12);
}

TEST(CrfNll, MatchesEnumerationOnThreeByTwo) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor em = oracle::random_tensor(rng, {3, 2}, -3.0, 3.0);
    CrfFixture f(em, random_transitions(rng, 2));
    for (const auto& gold : oracle::all_sequences(3, 2)) {
      EXPECT_NEAR(f.nll(gold), oracle::nll(em, f.trans->value, gold), 1e-10);
    }
  }
}

TEST(CrfNll, UniformScoresGiveNLogT) {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t tags = 1; tags <= 4; ++tags) {
      CrfFixture f(Tensor({n, tags}), Tensor({tags + 2, tags + 2}));
      EXPECT_NEAR(f.nll(std::vector<std::size_t>(n, tags - 1)), static_cast<double>(n) * std::log(tags), 1e-10);
    }
  }
}

TEST(CrfNll, NonNegativeAndNormalised) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> nd(1, 5), td(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = nd(rng), tags = td(rng);
    CrfFixture f(oracle::random_tensor(rng, {n, tags}, -3.0, 3.0), random_transitions(rng, tags));
    double total = 0.0;
    for (const auto& gold : oracle::all_sequences(n, tags)) {
      const double loss = f.nll(gold);
      EXPECT_GE(loss, -1e-12);
      total += std::exp(-loss);
    }
    EXPECT_NEAR(total, 1.0, 1e-8);
  }
}

TEST(CrfNll, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + trial % 5, tags = 1 + trial % 4;
    CrfFixture f(oracle::random_tensor(rng, {n, tags}), random_transitions(rng, tags));
    std::vector<std::size_t> gold(n);
    for (auto& y : gold) y = rng() % tags;
    auto loss = [&](Graph& g) { return crf_nll(g, f.emissions(g), g.parameter(*f.trans), gold); };
    const auto report = oracle::check_gradients(f.store, loss);
    EXPECT_LE(report.max_relative_error, 1e-4) << report.worst;
  }
}

TEST(CrfNll, RejectsBadInput) {
  CrfFixture f(Tensor({2, 3}), Tensor({5, 5}));
  Graph g;
  EXPECT_THROW(crf_nll(g, f.emissions(g), g.parameter(*f.trans), std::vector<std::size_t>{0, 3}), ShapeError);
  EXPECT_THROW(crf_nll(g, f.emissions(g), g.parameter(*f.trans), std::vector<std::size_t>{0}), ShapeError);
  EXPECT_THROW(crf_nll(g, {}, g.parameter(*f.trans), {}), std::invalid_argument);
}

TEST(Viterbi, SingleTag) {
  EXPECT_EQ(viterbi(Tensor({3, 1}, 0.5), Tensor({3, 3})), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Viterbi, AllEqualScoresPickLowestTags) {
  EXPECT_EQ(viterbi(Tensor({4, 3}), Tensor({5, 5})), (std::vector<std::size_t>(4, 0)));
}

TEST(Viterbi, MatchesEnumerationWithTies) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> nd(1, 6), td(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = nd(rng), tags = td(rng);
    // Small integers make ties frequent and every sum exact.
    const Tensor em = oracle::random_integer_tensor(rng, {n, tags}, -1, 1);
    const Tensor trans = oracle::random_integer_tensor(rng, {tags + 2, tags + 2}, -1, 1);
    const auto path = viterbi(em, trans);
    EXPECT_EQ(path, oracle::best_path(em, trans));
    for (const auto& y : oracle::all_sequences(n, tags)) {
      EXPECT_GE(oracle::path_score(em, trans, path), oracle::path_score(em, trans, y));
    }
  }
}

TEST(SoftmaxNll, Examples) {
  Graph g;
  std::vector<Expr> e{g.constant(Tensor::vector({0.0, 0.0}))};
  EXPECT_NEAR(softmax_nll(e, std::vector<std::size_t>{1}).scalar(), std::log(2.0), 1e-15);
  CrfFixture f(Tensor({3, 1}, 0.7), Tensor({3, 3}));
  Graph h;
  const std::vector<std::size_t> gold{0, 0, 0};
  EXPECT_NEAR(softmax_nll(f.emissions(h), gold).scalar(), f.nll(gold), 1e-12);
}

TEST(SoftmaxNll, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  CrfFixture f(oracle::random_tensor(rng, {4, 3}), Tensor({5, 5}));
  const std::vector<std::size_t> gold{2, 0, 1, 1};
  auto loss = [&](Graph& g) { return softmax_nll(f.emissions(g), gold); };
  EXPECT_LE(oracle::check_gradients(f.store, loss).max_relative_error, 1e-4);
}

TEST(Transitions, MaskedEntries) {
  ParameterStore store;
  const Parameter& p = add_crf_transitions(store, "t", 3);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(p.value.at(crf_stop(3), k), kMaskedTransition);
    EXPECT_EQ(p.value.at(k, crf_start(3)), kMaskedTransition);
  }
  EXPECT_EQ(p.value.at(crf_start(3), 0), 0.0);
}
