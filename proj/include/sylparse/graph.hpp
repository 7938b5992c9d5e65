#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sylparse/errors.hpp"
#include "sylparse/tensor.hpp"

namespace sylparse {

// A trainable tensor with its gradient slot and Adam moment estimates.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
};

namespace ad {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Expr {
  Graph* graph = nullptr;
  std::size_t index = 0;

  bool valid() const { return graph != nullptr; }
  const Tensor& value() const;
  double scalar() const;
  std::size_t dim() const { return value().size(); }
};

enum class GradientMode { track, frozen };

// Dynamic computation graph, built once per sentence and dropped after
// backward. Nodes are appended in evaluation order, so the node vector is a
// topological order of the (acyclic) parent relation.
//
// Parameter leaves do not copy the parameter; their gradient slot is the
// parameter's own `grad`, which therefore accumulates across graphs until
// the optimizer zeroes it. A frozen graph never records gradients and only
// reads parameter values, so several frozen graphs may share one store.
class Graph {
 public:
  using Backprop = std::function<void(Graph&, std::size_t)>;

  explicit Graph(GradientMode mode = GradientMode::track) : mode_(mode) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(Tensor value) {
    check_finite("constant", value);
    Node node;
    node.value = std::move(value);
    return push(std::move(node));
  }

  Expr parameter(Parameter& p) {
    Node node;
    node.param = &p;
    node.requires_grad = mode_ == GradientMode::track;
    return push(std::move(node));
  }

  // Row `row` of an embedding table. The backward pass scatters into the
  // table's gradient row only.
  Expr lookup(Parameter& table, std::size_t row) {
    if (table.value.rank() != 2 || row >= table.value.rows()) {
      throw ShapeError("lookup: row " + std::to_string(row) + " out of range for table " +
                       table.name + " " + table.value.shape_string());
    }
    const auto src = table.value.row(row);
    Node node;
    node.value = Tensor::vector(std::vector<double>(src.begin(), src.end()));
    node.requires_grad = mode_ == GradientMode::track;
    if (node.requires_grad) {
      Parameter* target = &table;
      node.backprop = [target, row](Graph& g, std::size_t self) {
        const Tensor& go = g.gradient(self);
        auto dst = target->grad.row(row);
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += go[k];
      };
    }
    return push(std::move(node));
  }

  // Appends a computed node. `backprop` reads the node's own gradient and
  // accumulates into its parents'; it is dropped when no parent needs it.
  Expr record(std::string_view op, Tensor value, std::vector<std::size_t> parents,
              Backprop backprop) {
    check_finite(op, value);
    Node node;
    node.value = std::move(value);
    bool needs = false;
    for (std::size_t p : parents) needs = needs || nodes_[p].requires_grad;
    node.requires_grad = needs && mode_ == GradientMode::track;
    if (node.requires_grad) node.backprop = std::move(backprop);
    node.parents = std::move(parents);
    return push(std::move(node));
  }

  const Tensor& value(std::size_t i) const {
    const Node& n = nodes_[i];
    return n.param ? n.param->value : n.value;
  }

  // Gradient slot of node i, zero-allocated on first use.
  Tensor& gradient(std::size_t i) {
    Node& n = nodes_[i];
    if (n.param) return n.param->grad;
    if (n.grad.empty()) n.grad = Tensor(n.value.shape());
    return n.grad;
  }

  bool requires_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  const std::vector<std::size_t>& parents(std::size_t i) const { return nodes_[i].parents; }
  std::size_t size() const { return nodes_.size(); }
  GradientMode mode() const { return mode_; }

  void backward(Expr loss) {
    if (loss.graph != this) throw std::invalid_argument("backward: loss belongs to another graph");
    const Tensor& lv = value(loss.index);
    if (lv.size() != 1) {
      throw ShapeError("backward: loss must be a scalar, got shape " + lv.shape_string());
    }
    for (Node& n : nodes_) {
      if (!n.param) n.grad = Tensor();
    }
    if (!nodes_[loss.index].requires_grad) return;
    gradient(loss.index)[0] += 1.0;
    for (std::size_t i = loss.index + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.backprop || n.grad.empty()) continue;
      n.backprop(*this, i);
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    std::vector<std::size_t> parents;
    Backprop backprop;
    bool requires_grad = false;
  };

  static void check_finite(std::string_view op, const Tensor& t) {
    if (!t.all_finite()) {
      throw NumericError(std::string(op) + ": non-finite value in forward pass");
    }
  }

  Expr push(Node node) {
    nodes_.push_back(std::move(node));
    return Expr{this, nodes_.size() - 1};
  }

  GradientMode mode_;
  std::vector<Node> nodes_;
};

inline const Tensor& Expr::value() const { return graph->value(index); }
inline double Expr::scalar() const { return value()[0]; }

}  // namespace ad
}  // namespace sylparse
