#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sylparse/ops.hpp"
#include "sylparse/parameters.hpp"

namespace sylparse {

// Linear-chain CRF over T tags. The transition table is (T+2) x (T+2):
// rows are the previous state, columns the next, with virtual states
// start = T and stop = T+1. Transitions out of stop and into start are
// masked with kMaskedTransition and never take part in any path.
inline constexpr double kMaskedTransition = -1e9;

inline std::size_t crf_start(std::size_t tags) { return tags; }
inline std::size_t crf_stop(std::size_t tags) { return tags + 1; }

inline Parameter& add_crf_transitions(ParameterStore& store, const std::string& name,
                                      std::size_t tags) {
  Parameter& p = store.add(name, {tags + 2, tags + 2}, Initializer::zeros);
  for (std::size_t k = 0; k < tags + 2; ++k) {
    p.value.at(crf_stop(tags), k) = kMaskedTransition;
    p.value.at(k, crf_start(tags)) = kMaskedTransition;
  }
  return p;
}

// Stacks emission vectors into an n x T matrix.
inline Tensor emission_matrix(std::span<const ad::Expr> emissions) {
  if (emissions.empty()) throw std::invalid_argument("emission matrix: empty sequence");
  const std::size_t tags = emissions.front().dim();
  Tensor out({emissions.size(), tags});
  for (std::size_t t = 0; t < emissions.size(); ++t) {
    const Tensor& e = emissions[t].value();
    if (e.size() != tags) throw ShapeError("emission matrix: ragged emission widths");
    std::copy(e.data().begin(), e.data().end(), out.row(t).begin());
  }
  return out;
}

namespace detail {

inline double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

inline void check_gold(const char* op, std::size_t n, std::size_t tags,
                       std::span<const std::size_t> gold) {
  if (n == 0) throw std::invalid_argument(std::string(op) + ": empty sequence");
  if (gold.size() != n) {
    throw ShapeError(std::string(op) + ": " + std::to_string(gold.size()) + " gold tags for " +
                     std::to_string(n) + " positions");
  }
  for (std::size_t y : gold) {
    if (y >= tags) throw ShapeError(std::string(op) + ": gold tag " + std::to_string(y) + " out of range");
  }
}

}  // namespace detail

// Negative log-likelihood of the gold path: log Z - score(gold), with Z from
// the forward algorithm in log space. The backward pass uses forward-backward
// marginals, so the whole sequence costs a single graph node.
inline ad::Expr crf_nll(ad::Graph& g, std::span<const ad::Expr> emissions, ad::Expr transitions,
                        std::span<const std::size_t> gold) {
  const std::size_t n = emissions.size();
  const Tensor& trans = transitions.value();
  const std::size_t tags = trans.rows() >= 2 ? trans.rows() - 2 : 0;
  if (trans.rank() != 2 || trans.rows() != trans.cols() || tags == 0) {
    throw ShapeError("crf_nll: transition table must be square (T+2)x(T+2), got " +
                     trans.shape_string());
  }
  detail::check_gold("crf_nll", n, tags, gold);
  const Tensor em = emission_matrix(emissions);
  if (em.cols() != tags) {
    throw ShapeError("crf_nll: emissions of width " + std::to_string(em.cols()) + " for " +
                     std::to_string(tags) + " tags");
  }
  const std::size_t start = crf_start(tags), stop = crf_stop(tags);

  Tensor alpha({n, tags});
  std::vector<double> buf(tags);
  for (std::size_t k = 0; k < tags; ++k) alpha.at(0, k) = trans.at(start, k) + em.at(0, k);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t k = 0; k < tags; ++k) {
      for (std::size_t j = 0; j < tags; ++j) buf[j] = alpha.at(t - 1, j) + trans.at(j, k);
      alpha.at(t, k) = detail::log_sum_exp(buf) + em.at(t, k);
    }
  }
  for (std::size_t k = 0; k < tags; ++k) buf[k] = alpha.at(n - 1, k) + trans.at(k, stop);
  const double log_z = detail::log_sum_exp(buf);

  double gold_score = trans.at(start, gold[0]) + trans.at(gold[n - 1], stop);
  for (std::size_t t = 0; t < n; ++t) {
    gold_score += em.at(t, gold[t]);
    if (t > 0) gold_score += trans.at(gold[t - 1], gold[t]);
  }

  std::vector<std::size_t> parents;
  for (const auto& e : emissions) parents.push_back(e.index);
  parents.push_back(transitions.index);
  std::vector<std::size_t> emission_ids(parents.begin(), parents.end() - 1);
  const std::size_t trans_id = transitions.index;
  std::vector<std::size_t> gold_copy(gold.begin(), gold.end());

  return g.record(
      "crf_nll", Tensor::scalar(log_z - gold_score), std::move(parents),
      [emission_ids = std::move(emission_ids), trans_id, gold = std::move(gold_copy), em,
       alpha = std::move(alpha), log_z, tags, start, stop](ad::Graph& g, std::size_t self) {
        const double go = g.gradient(self)[0];
        const Tensor& trans = g.value(trans_id);
        const std::size_t n = em.rows();
        Tensor beta({n, tags});
        std::vector<double> buf(tags);
        for (std::size_t k = 0; k < tags; ++k) beta.at(n - 1, k) = trans.at(k, stop);
        for (std::size_t t = n - 1; t-- > 0;) {
          for (std::size_t j = 0; j < tags; ++j) {
            for (std::size_t k = 0; k < tags; ++k) {
              buf[k] = trans.at(j, k) + em.at(t + 1, k) + beta.at(t + 1, k);
            }
            beta.at(t, j) = detail::log_sum_exp(buf);
          }
        }
        const bool trans_grad = g.requires_grad(trans_id);
        Tensor* gt = trans_grad ? &g.gradient(trans_id) : nullptr;
        for (std::size_t t = 0; t < n; ++t) {
          Tensor* ge = g.requires_grad(emission_ids[t]) ? &g.gradient(emission_ids[t]) : nullptr;
          for (std::size_t k = 0; k < tags; ++k) {
            const double marginal = std::exp(alpha.at(t, k) + beta.at(t, k) - log_z);
            const double indicator = gold[t] == k ? 1.0 : 0.0;
            if (ge) (*ge)[k] += go * (marginal - indicator);
            if (!gt) continue;
            if (t == 0) gt->at(start, k) += go * (marginal - indicator);
            if (t == n - 1) gt->at(k, stop) += go * (marginal - indicator);
            if (t > 0) {
              for (std::size_t j = 0; j < tags; ++j) {
                const double pair = std::exp(alpha.at(t - 1, j) + trans.at(j, k) + em.at(t, k) +
                                             beta.at(t, k) - log_z);
                const double gold_pair = (gold[t - 1] == j && gold[t] == k) ? 1.0 : 0.0;
                gt->at(j, k) += go * (pair - gold_pair);
              }
            }
          }
        }
      });
}

// Highest-scoring tag sequence including start and stop transitions. Ties go
// to the lower tag index, both at each backpointer and at the final state.
inline std::vector<std::size_t> viterbi(const Tensor& emissions, const Tensor& transitions) {
  const std::size_t n = emissions.rows();
  const std::size_t tags = emissions.cols();
  if (n == 0) throw std::invalid_argument("viterbi: empty sequence");
  if (transitions.rows() != tags + 2 || transitions.cols() != tags + 2) {
    throw ShapeError("viterbi: transitions " + transitions.shape_string() + " for " +
                     std::to_string(tags) + " tags");
  }
  const std::size_t start = crf_start(tags), stop = crf_stop(tags);
  Tensor delta({n, tags});
  std::vector<std::size_t> back(n * tags, 0);
  for (std::size_t k = 0; k < tags; ++k) delta.at(0, k) = transitions.at(start, k) + emissions.at(0, k);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t k = 0; k < tags; ++k) {
      std::size_t best = 0;
      double best_score = delta.at(t - 1, 0) + transitions.at(0, k);
      for (std::size_t j = 1; j < tags; ++j) {
        const double s = delta.at(t - 1, j) + transitions.at(j, k);
        if (s > best_score) {
          best_score = s;
          best = j;
        }
      }
      delta.at(t, k) = best_score + emissions.at(t, k);
      back[t * tags + k] = best;
    }
  }
  std::size_t last = 0;
  double best_score = delta.at(n - 1, 0) + transitions.at(0, stop);
  for (std::size_t k = 1; k < tags; ++k) {
    const double s = delta.at(n - 1, k) + transitions.at(k, stop);
    if (s > best_score) {
      best_score = s;
      last = k;
    }
  }
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t * tags + path[t]];
  return path;
}

// Per-position argmax, ties to the lower index.
inline std::vector<std::size_t> argmax_tags(const Tensor& emissions) {
  std::vector<std::size_t> out(emissions.rows());
  for (std::size_t t = 0; t < emissions.rows(); ++t) {
    const auto row = emissions.row(t);
    out[t] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

// Independent per-position cross-entropy; the softmax ablation of the CRF.
inline ad::Expr softmax_nll(std::span<const ad::Expr> emissions, std::span<const std::size_t> gold) {
  const std::size_t tags = emissions.empty() ? 0 : emissions.front().dim();
  detail::check_gold("softmax_nll", emissions.size(), tags, gold);
  std::vector<ad::Expr> terms;
  terms.reserve(emissions.size());
  for (std::size_t t = 0; t < emissions.size(); ++t) {
    terms.push_back(ad::sub(ad::log_sum_exp(emissions[t]), ad::pick(emissions[t], gold[t])));
  }
  return ad::sum(terms);
}

}  // namespace sylparse
