#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sylparse/context.hpp"
#include "sylparse/layers.hpp"
#include "sylparse/ops.hpp"
#include "sylparse/parameters.hpp"

namespace sylparse {

// Arc scores for one sentence of n words plus the root at position 0.
// `arcs[h * (n + 1) + d]` scores head h -> dependent d; entries with d == 0
// or h == d are unset and zero in `matrix`.
struct ArcScores {
  std::size_t words = 0;
  std::vector<ad::Expr> arcs;
  Tensor matrix;
  std::vector<ad::Expr> label_head;  // hidden-layer contribution of each position as head
  std::vector<ad::Expr> label_dep;   // ... and as dependent (bias included)

  ad::Expr arc(std::size_t head, std::size_t dep) const { return arcs[head * (words + 1) + dep]; }
};

// Head/dependent projections of the parser states, the arc scorer and the
// arc labeler. Both scorers are one-hidden-layer MLPs over the concatenation
// [head; dependent]; the first layer is stored as separate head and
// dependent blocks so that it is applied once per position rather than once
// per pair.
class ProjectionHeads {
 public:
  ProjectionHeads(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                  std::size_t projection_dim, std::size_t label_count)
      : arc_head_(store, prefix + "/arc_head", input_dim, projection_dim, Activation::tanh),
        arc_dep_(store, prefix + "/arc_dep", input_dim, projection_dim, Activation::tanh),
        label_head_(store, prefix + "/label_head", input_dim, projection_dim, Activation::tanh),
        label_dep_(store, prefix + "/label_dep", input_dim, projection_dim, Activation::tanh),
        arc_w_head_(&store.add(prefix + "/arc_scorer/W_head", {projection_dim, projection_dim},
                               Initializer::glorot_uniform)),
        arc_w_dep_(&store.add(prefix + "/arc_scorer/W_dep", {projection_dim, projection_dim},
                              Initializer::glorot_uniform)),
        arc_b_(&store.add(prefix + "/arc_scorer/b", {projection_dim}, Initializer::zeros)),
        arc_out_(&store.add(prefix + "/arc_scorer/out_W", {1, projection_dim},
                            Initializer::glorot_uniform)),
        arc_out_b_(&store.add(prefix + "/arc_scorer/out_b", {1}, Initializer::zeros)),
        label_w_head_(&store.add(prefix + "/label_scorer/W_head", {projection_dim, projection_dim},
                                 Initializer::glorot_uniform)),
        label_w_dep_(&store.add(prefix + "/label_scorer/W_dep", {projection_dim, projection_dim},
                                Initializer::glorot_uniform)),
        label_b_(&store.add(prefix + "/label_scorer/b", {projection_dim}, Initializer::zeros)),
        label_out_(&store.add(prefix + "/label_scorer/out_W", {label_count, projection_dim},
                              Initializer::glorot_uniform)),
        label_out_b_(&store.add(prefix + "/label_scorer/out_b", {label_count}, Initializer::zeros)),
        input_dim_(input_dim),
        label_count_(label_count) {}

  // `states` holds the root at index 0 followed by the n words.
  ArcScores score_arcs(ad::Graph& g, std::span<const ad::Expr> states, ForwardContext& ctx) const {
    if (states.size() < 2) throw std::invalid_argument("score_arcs: need the root and at least one word");
    const std::size_t n = states.size() - 1;
    ArcScores out;
    out.words = n;
    out.arcs.resize((n + 1) * (n + 1));
    out.matrix = Tensor({n + 1, n + 1});

    const ad::Expr wh = g.parameter(*arc_w_head_), wd = g.parameter(*arc_w_dep_);
    const ad::Expr b = g.parameter(*arc_b_);
    const ad::Expr uh = g.parameter(*label_w_head_), ud = g.parameter(*label_w_dep_);
    const ad::Expr c = g.parameter(*label_b_);
    std::vector<ad::Expr> head_part(n + 1), dep_part(n + 1);
    out.label_head.resize(n + 1);
    out.label_dep.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      if (states[i].dim() != input_dim_) {
        throw ShapeError("score_arcs: state width " + std::to_string(states[i].dim()) +
                         ", expected " + std::to_string(input_dim_));
      }
      const ad::Expr ah = arc_head_(g, dropout(states[i], ctx));
      const ad::Expr lh = label_head_(g, dropout(states[i], ctx));
      head_part[i] = ad::matvec(wh, dropout(ah, ctx));
      out.label_head[i] = ad::matvec(uh, dropout(lh, ctx));
      if (i == 0) continue;
      const ad::Expr adep = arc_dep_(g, dropout(states[i], ctx));
      const ad::Expr ldep = label_dep_(g, dropout(states[i], ctx));
      dep_part[i] = ad::affine(wd, dropout(adep, ctx), b);
      out.label_dep[i] = ad::affine(ud, dropout(ldep, ctx), c);
    }

    const ad::Expr w_out = g.parameter(*arc_out_), b_out = g.parameter(*arc_out_b_);
    for (std::size_t h = 0; h <= n; ++h) {
      for (std::size_t d = 1; d <= n; ++d) {
        if (h == d) continue;
        const ad::Expr hidden = ad::tanh(ad::add(head_part[h], dep_part[d]));
        const ad::Expr s = ad::affine(w_out, hidden, b_out);
        out.arcs[h * (n + 1) + d] = s;
        out.matrix.at(h, d) = s.scalar();
      }
    }
    return out;
  }

  ad::Expr label_logits(ad::Graph& g, const ArcScores& arcs, std::size_t head, std::size_t dep) const {
    const ad::Expr hidden = ad::tanh(ad::add(arcs.label_head[head], arcs.label_dep[dep]));
    return ad::affine(g.parameter(*label_out_), hidden, g.parameter(*label_out_b_));
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t label_count() const { return label_count_; }

 private:
  Dense arc_head_, arc_dep_, label_head_, label_dep_;
  Parameter* arc_w_head_;
  Parameter* arc_w_dep_;
  Parameter* arc_b_;
  Parameter* arc_out_;
  Parameter* arc_out_b_;
  Parameter* label_w_head_;
  Parameter* label_w_dep_;
  Parameter* label_b_;
  Parameter* label_out_;
  Parameter* label_out_b_;
  std::size_t input_dim_;
  std::size_t label_count_;
};

// First-order projective decoding over complete and incomplete spans.
// `scores` is (n+1) x (n+1), scores(h, d) for head h -> dependent d; the
// root (0) may take several dependents. Returns heads[j-1] for word j.
// Among equal-scoring alternatives the leftmost split point wins.
inline std::vector<std::size_t> eisner_decode(const Tensor& scores) {
  const std::size_t size = scores.rows();
  if (size < 2 || scores.cols() != size) {
    throw ShapeError("eisner_decode: score matrix must be (n+1)x(n+1) with n >= 1, got " +
                     scores.shape_string());
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const std::size_t n = size - 1;
  // Index (s, t, dir): dir 0 = head at t (left arc), dir 1 = head at s.
  auto idx = [size](std::size_t s, std::size_t t, std::size_t dir) { return (s * size + t) * 2 + dir; };
  std::vector<double> complete(size * size * 2, kNegInf), incomplete(size * size * 2, kNegInf);
  std::vector<std::size_t> complete_split(size * size * 2, 0), incomplete_split(size * size * 2, 0);
  for (std::size_t s = 0; s < size; ++s) {
    complete[idx(s, s, 0)] = 0.0;
    complete[idx(s, s, 1)] = 0.0;
  }
  for (std::size_t k = 1; k < size; ++k) {
    for (std::size_t s = 0; s + k < size; ++s) {
      const std::size_t t = s + k;
      double best = kNegInf;
      std::size_t arg = s;
      for (std::size_t r = s; r < t; ++r) {
        const double v = complete[idx(s, r, 1)] + complete[idx(r + 1, t, 0)];
        if (v > best) {
          best = v;
          arg = r;
        }
      }
      incomplete[idx(s, t, 0)] = s == 0 ? kNegInf : best + scores.at(t, s);
      incomplete_split[idx(s, t, 0)] = arg;
      incomplete[idx(s, t, 1)] = best + scores.at(s, t);
      incomplete_split[idx(s, t, 1)] = arg;

      best = kNegInf;
      arg = s;
      for (std::size_t r = s; r < t; ++r) {
        const double v = complete[idx(s, r, 0)] + incomplete[idx(r, t, 0)];
        if (v > best) {
          best = v;
          arg = r;
        }
      }
      complete[idx(s, t, 0)] = best;
      complete_split[idx(s, t, 0)] = arg;

      best = kNegInf;
      arg = s + 1;
      for (std::size_t r = s + 1; r <= t; ++r) {
        const double v = incomplete[idx(s, r, 1)] + complete[idx(r, t, 1)];
        if (v > best) {
          best = v;
          arg = r;
        }
      }
      complete[idx(s, t, 1)] = best;
      complete_split[idx(s, t, 1)] = arg;
    }
  }

  std::vector<std::size_t> heads(n, 0);
  struct Item {
    std::size_t s, t, dir;
    bool complete;
  };
  std::vector<Item> stack{{0, n, 1, true}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.s == it.t) continue;
    if (it.complete) {
      const std::size_t r = complete_split[idx(it.s, it.t, it.dir)];
      if (it.dir == 0) {
        stack.push_back({it.s, r, 0, true});
        stack.push_back({r, it.t, 0, false});
      } else {
        stack.push_back({it.s, r, 1, false});
        stack.push_back({r, it.t, 1, true});
      }
    } else {
      const std::size_t r = incomplete_split[idx(it.s, it.t, it.dir)];
      if (it.dir == 0) {
        heads[it.s - 1] = it.t;
      } else {
        heads[it.t - 1] = it.s;
      }
      stack.push_back({it.s, r, 1, true});
      stack.push_back({r + 1, it.t, 0, true});
    }
  }
  return heads;
}

inline double tree_score(const Tensor& scores, std::span<const std::size_t> heads) {
  double total = 0.0;
  for (std::size_t j = 0; j < heads.size(); ++j) total += scores.at(heads[j], j + 1);
  return total;
}

inline constexpr double kArcMargin = 1.0;

// Structured hinge with per-arc cost: decode with +1 on every non-gold arc,
// then max(0, augmented score of that tree - gold score). Arcs shared by the
// two trees cancel, so the gradient is +1 on predicted-only arcs and -1 on
// gold-only arcs.
inline ad::Expr arc_hinge_loss(ad::Graph& g, const ArcScores& arcs,
                               std::span<const std::size_t> gold_heads) {
  const std::size_t n = arcs.words;
  if (gold_heads.size() != n) throw ShapeError("arc_hinge_loss: gold tree size mismatch");
  Tensor augmented = arcs.matrix;
  for (std::size_t d = 1; d <= n; ++d) {
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != d && h != gold_heads[d - 1]) augmented.at(h, d) += kArcMargin;
    }
  }
  const auto predicted = eisner_decode(augmented);
  const double violation = tree_score(augmented, predicted) - tree_score(arcs.matrix, gold_heads);
  if (violation <= 0.0) return g.constant(Tensor::scalar(0.0));
  std::vector<ad::Expr> wrong, right;
  for (std::size_t d = 1; d <= n; ++d) {
    if (predicted[d - 1] == gold_heads[d - 1]) continue;
    wrong.push_back(arcs.arc(predicted[d - 1], d));
    right.push_back(arcs.arc(gold_heads[d - 1], d));
  }
  const ad::Expr gap = ad::sub(ad::sum(wrong), ad::sum(right));
  return ad::add_scalar(gap, kArcMargin * static_cast<double>(wrong.size()));
}

// Summed softmax cross-entropy of the gold label of every (gold) arc.
inline ad::Expr label_loss(ad::Graph& g, const ProjectionHeads& heads_layer, const ArcScores& arcs,
                           std::span<const std::size_t> heads, std::span<const std::size_t> labels) {
  if (heads.size() != arcs.words || labels.size() != arcs.words) {
    throw ShapeError("label_loss: annotation size mismatch");
  }
  std::vector<ad::Expr> terms;
  terms.reserve(heads.size());
  for (std::size_t d = 1; d <= arcs.words; ++d) {
    const ad::Expr logits = heads_layer.label_logits(g, arcs, heads[d - 1], d);
    terms.push_back(ad::sub(ad::log_sum_exp(logits), ad::pick(logits, labels[d - 1])));
  }
  return ad::sum(terms);
}

// Argmax label of every arc, ties to the lower label index.
inline std::vector<std::size_t> predict_labels(ad::Graph& g, const ProjectionHeads& heads_layer,
                                               const ArcScores& arcs,
                                               std::span<const std::size_t> heads) {
  std::vector<std::size_t> out(heads.size());
  for (std::size_t d = 1; d <= arcs.words; ++d) {
    const Tensor& v = heads_layer.label_logits(g, arcs, heads[d - 1], d).value();
    out[d - 1] = static_cast<std::size_t>(std::max_element(v.data().begin(), v.data().end()) -
                                          v.data().begin());
  }
  return out;
}

}  // namespace sylparse
