#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sylparse/ops.hpp"
#include "sylparse/parameters.hpp"

namespace sylparse {

struct LstmState {
  ad::Expr hidden;
  ad::Expr cell;
};

// Standard LSTM step without peepholes. `weights` is (4H x (in + H)) acting
// on [input; hidden]; gate blocks are stacked input, forget, output,
// candidate.
inline LstmState lstm_cell(ad::Expr input, ad::Expr hidden, ad::Expr cell, ad::Expr weights,
                           ad::Expr bias) {
  const std::size_t h = hidden.dim();
  const Tensor& w = weights.value();
  if (cell.dim() != h || w.rank() != 2 || w.rows() != 4 * h || w.cols() != input.dim() + h ||
      bias.dim() != 4 * h) {
    throw ShapeError("lstm_cell: weights " + w.shape_string() + " / bias " +
                     bias.value().shape_string() + " do not fit input " +
                     input.value().shape_string() + " and hidden size " + std::to_string(h));
  }
  const ad::Expr gates = ad::affine(weights, ad::concat({input, hidden}), bias);
  const ad::Expr in_gate = ad::sigmoid(ad::slice(gates, 0, h));
  const ad::Expr forget_gate = ad::sigmoid(ad::slice(gates, h, 2 * h));
  const ad::Expr out_gate = ad::sigmoid(ad::slice(gates, 2 * h, 3 * h));
  const ad::Expr candidate = ad::tanh(ad::slice(gates, 3 * h, 4 * h));
  const ad::Expr next_cell = ad::add(ad::cmult(forget_gate, cell), ad::cmult(in_gate, candidate));
  return {ad::cmult(out_gate, ad::tanh(next_cell)), next_cell};
}

// One direction of one layer.
class LstmLayer {
 public:
  LstmLayer(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
            std::size_t hidden_dim)
      : weights_(&store.add(prefix + "/W", {4 * hidden_dim, input_dim + hidden_dim},
                            Initializer::glorot_uniform)),
        bias_(&store.add(prefix + "/b", {4 * hidden_dim}, Initializer::zeros)),
        input_dim_(input_dim),
        hidden_dim_(hidden_dim) {}

  // Runs over `inputs` (right to left when `reverse`); output k belongs to
  // position k either way.
  std::vector<ad::Expr> run(ad::Graph& g, std::span<const ad::Expr> inputs, bool reverse) const {
    const ad::Expr w = g.parameter(*weights_);
    const ad::Expr b = g.parameter(*bias_);
    LstmState state{ad::zeros(g, hidden_dim_), ad::zeros(g, hidden_dim_)};
    std::vector<ad::Expr> out(inputs.size());
    for (std::size_t step = 0; step < inputs.size(); ++step) {
      const std::size_t k = reverse ? inputs.size() - 1 - step : step;
      state = lstm_cell(inputs[k], state.hidden, state.cell, w, b);
      out[k] = state.hidden;
    }
    return out;
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }

 private:
  Parameter* weights_;
  Parameter* bias_;
  std::size_t input_dim_;
  std::size_t hidden_dim_;
};

// Stacked bidirectional LSTM. Layer l > 0 reads [forward; backward] of
// layer l - 1; the output at i is [forward_i; backward_i] of the top layer.
class BiLstm {
 public:
  BiLstm(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
         std::size_t hidden_dim, std::size_t layers) {
    if (layers == 0) throw std::invalid_argument("bilstm: at least one layer required");
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::string lp = prefix + "/l" + std::to_string(l);
      forward_.emplace_back(store, lp + "/fwd", in, hidden_dim);
      backward_.emplace_back(store, lp + "/bwd", in, hidden_dim);
      in = 2 * hidden_dim;
    }
    input_dim_ = input_dim;
    hidden_dim_ = hidden_dim;
  }

  std::vector<ad::Expr> transduce(ad::Graph& g, std::span<const ad::Expr> inputs) const {
    if (inputs.empty()) throw std::invalid_argument("bilstm: empty input sequence");
    for (const ad::Expr& x : inputs) {
      if (x.dim() != input_dim_) {
        throw ShapeError("bilstm: input width " + std::to_string(x.dim()) + ", expected " +
                         std::to_string(input_dim_));
      }
    }
    std::vector<ad::Expr> layer_in(inputs.begin(), inputs.end());
    for (std::size_t l = 0; l < forward_.size(); ++l) {
      const auto fwd = forward_[l].run(g, layer_in, false);
      const auto bwd = backward_[l].run(g, layer_in, true);
      for (std::size_t i = 0; i < layer_in.size(); ++i) layer_in[i] = ad::concat({fwd[i], bwd[i]});
    }
    return layer_in;
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return 2 * hidden_dim_; }
  std::size_t layers() const { return forward_.size(); }

 private:
  std::vector<LstmLayer> forward_;
  std::vector<LstmLayer> backward_;
  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
};

}  // namespace sylparse
