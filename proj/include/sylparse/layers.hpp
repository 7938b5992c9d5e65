#pragma once

#include <cstddef>
#include <string>

#include "sylparse/ops.hpp"
#include "sylparse/parameters.hpp"

namespace sylparse {

enum class Activation { linear, tanh };

// Single-layer feed-forward network: act(W x + b).
class Dense {
 public:
  Dense(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
        std::size_t output_dim, Activation act)
      : weights_(&store.add(prefix + "/W", {output_dim, input_dim}, Initializer::glorot_uniform)),
        bias_(&store.add(prefix + "/b", {output_dim}, Initializer::zeros)),
        activation_(act) {}

  ad::Expr operator()(ad::Graph& g, ad::Expr x) const {
    const ad::Expr y = ad::affine(g.parameter(*weights_), x, g.parameter(*bias_));
    return activation_ == Activation::tanh ? ad::tanh(y) : y;
  }

  std::size_t input_dim() const { return weights_->value.cols(); }
  std::size_t output_dim() const { return weights_->value.rows(); }

 private:
  Parameter* weights_;
  Parameter* bias_;
  Activation activation_;
};

}  // namespace sylparse
