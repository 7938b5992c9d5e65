#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "sylparse/ops.hpp"

namespace sylparse {

// Per-forward-pass switches. Decoding uses the default (no dropout, no
// word dropout, no RNG).
struct ForwardContext {
  bool training = false;
  double keep_probability = 1.0;
  double word_dropout_alpha = 0.0;
  std::mt19937_64* rng = nullptr;

  bool dropout_active() const { return training && keep_probability < 1.0 && rng; }
};

// Inverted dropout: kept units are scaled by 1/keep so decoding needs no
// rescaling.
inline ad::Expr dropout(ad::Expr x, ForwardContext& ctx) {
  if (!ctx.dropout_active()) return x;
  std::bernoulli_distribution keep(ctx.keep_probability);
  std::vector<double> factors(x.dim());
  const double scale = 1.0 / ctx.keep_probability;
  for (double& f : factors) f = keep(*ctx.rng) ? scale : 0.0;
  return ad::mask(x, std::move(factors));
}

}  // namespace sylparse
