#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sylparse/graph.hpp"

namespace sylparse::ad {

namespace detail {

[[noreturn]] inline void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                   b.shape_string());
}

inline void require_vector(const char* op, const Tensor& t) {
  if (t.rank() != 1) throw ShapeError(std::string(op) + ": expected a vector, got " + t.shape_string());
}

template <typename F, typename D>
Expr unary(const char* op, Expr x, F f, D dfdx) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t k = 0; k < xv.size(); ++k) out[k] = f(xv[k]);
  const std::size_t xi = x.index;
  return x.graph->record(op, std::move(out), {xi}, [xi, dfdx](Graph& g, std::size_t self) {
    const Tensor& go = g.gradient(self);
    const Tensor& y = g.value(self);
    const Tensor& xv = g.value(xi);
    Tensor& gx = g.gradient(xi);
    for (std::size_t k = 0; k < go.size(); ++k) gx[k] += go[k] * dfdx(xv[k], y[k]);
  });
}

inline double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// W (r x c) times x (c).
inline Expr matvec(Expr w, Expr x) {
  const Tensor& wv = w.value();
  const Tensor& xv = x.value();
  if (wv.rank() != 2 || xv.rank() != 1 || wv.cols() != xv.size()) {
    detail::shape_mismatch("matvec", wv, xv);
  }
  const std::size_t rows = wv.rows(), cols = wv.cols();
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = wv.data().data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * xv[c];
    out[r] = acc;
  }
  const std::size_t wi = w.index, xi = x.index;
  return w.graph->record("matvec", std::move(out), {wi, xi}, [wi, xi](Graph& g, std::size_t self) {
    const Tensor& go = g.gradient(self);
    const Tensor& wv = g.value(wi);
    const Tensor& xv = g.value(xi);
    const std::size_t rows = wv.rows(), cols = wv.cols();
    if (g.requires_grad(wi)) {
      Tensor& gw = g.gradient(wi);
      for (std::size_t r = 0; r < rows; ++r) {
        if (go[r] == 0.0) continue;
        double* gr = gw.data().data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gr[c] += go[r] * xv[c];
      }
    }
    if (g.requires_grad(xi)) {
      Tensor& gx = g.gradient(xi);
      for (std::size_t r = 0; r < rows; ++r) {
        if (go[r] == 0.0) continue;
        const double* wr = wv.data().data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) gx[c] += go[r] * wr[c];
      }
    }
  });
}

inline Expr add(Expr a, Expr b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) detail::shape_mismatch("add", av, bv);
  Tensor out(av.shape());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] + bv[k];
  const std::size_t ai = a.index, bi = b.index;
  return a.graph->record("add", std::move(out), {ai, bi}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& go = g.gradient(self);
    for (std::size_t p : {ai, bi}) {
      if (!g.requires_grad(p)) continue;
      Tensor& gp = g.gradient(p);
      for (std::size_t k = 0; k < go.size(); ++k) gp[k] += go[k];
    }
  });
}

inline Expr sub(Expr a, Expr b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) detail::shape_mismatch("sub", av, bv);
  Tensor out(av.shape());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] - bv[k];
  const std::size_t ai = a.index, bi = b.index;
  return a.graph->record("sub", std::move(out), {ai, bi}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& go = g.gradient(self);
    if (g.requires_grad(ai)) {
      Tensor& ga = g.gradient(ai);
      for (std::size_t k = 0; k < go.size(); ++k) ga[k] += go[k];
    }
    if (g.requires_grad(bi)) {
      Tensor& gb = g.gradient(bi);
      for (std::size_t k = 0; k < go.size(); ++k) gb[k] -= go[k];
    }
  });
}

// W x + b.
inline Expr affine(Expr w, Expr x, Expr b) { return add(matvec(w, x), b); }

// Elementwise product.
inline Expr cmult(Expr a, Expr b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) detail::shape_mismatch("cmult", av, bv);
  Tensor out(av.shape());
  for (std::size_t k = 0; k < av.size(); ++k) out[k] = av[k] * bv[k];
  const std::size_t ai = a.index, bi = b.index;
  return a.graph->record("cmult", std::move(out), {ai, bi}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& go = g.gradient(self);
    if (g.requires_grad(ai)) {
      const Tensor& bv = g.value(bi);
      Tensor& ga = g.gradient(ai);
      for (std::size_t k = 0; k < go.size(); ++k) ga[k] += go[k] * bv[k];
    }
    if (g.requires_grad(bi)) {
      const Tensor& av = g.value(ai);
      Tensor& gb = g.gradient(bi);
      for (std::size_t k = 0; k < go.size(); ++k) gb[k] += go[k] * av[k];
    }
  });
}

inline Expr scale(Expr x, double factor) {
  return detail::unary("scale", x, [factor](double v) { return v * factor; },
                       [factor](double, double) { return factor; });
}

inline Expr add_scalar(Expr x, double c) {
  return detail::unary("add_scalar", x, [c](double v) { return v + c; },
                       [](double, double) { return 1.0; });
}

// Elementwise product with a constant mask (dropout).
inline Expr mask(Expr x, std::vector<double> factors) {
  const Tensor& xv = x.value();
  if (factors.size() != xv.size()) {
    throw ShapeError("mask: " + std::to_string(factors.size()) + " factors for shape " +
                     xv.shape_string());
  }
  Tensor out(xv.shape());
  for (std::size_t k = 0; k < xv.size(); ++k) out[k] = xv[k] * factors[k];
  const std::size_t xi = x.index;
  return x.graph->record("mask", std::move(out), {xi},
                         [xi, f = std::move(factors)](Graph& g, std::size_t self) {
                           const Tensor& go = g.gradient(self);
                           Tensor& gx = g.gradient(xi);
                           for (std::size_t k = 0; k < go.size(); ++k) gx[k] += go[k] * f[k];
                         });
}

inline Expr tanh(Expr x) {
  return detail::unary("tanh", x, [](double v) { return std::tanh(v); },
                       [](double, double y) { return 1.0 - y * y; });
}

inline Expr sigmoid(Expr x) {
  return detail::unary("sigmoid", x, detail::stable_sigmoid,
                       [](double, double y) { return y * (1.0 - y); });
}

inline Expr relu(Expr x) {
  return detail::unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
                       [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Expr concat(std::span<const Expr> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  Graph* graph = parts.front().graph;
  std::size_t total = 0;
  std::vector<std::size_t> parents;
  parents.reserve(parts.size());
  for (const Expr& e : parts) {
    detail::require_vector("concat", e.value());
    total += e.dim();
    parents.push_back(e.index);
  }
  std::vector<double> data;
  data.reserve(total);
  for (const Expr& e : parts) {
    const auto src = e.value().data();
    data.insert(data.end(), src.begin(), src.end());
  }
  std::vector<std::size_t> ids = parents;
  return graph->record("concat", Tensor::vector(std::move(data)), std::move(parents),
                       [ids = std::move(ids)](Graph& g, std::size_t self) {
                         const Tensor& go = g.gradient(self);
                         std::size_t offset = 0;
                         for (std::size_t p : ids) {
                           const std::size_t n = g.value(p).size();
                           if (g.requires_grad(p)) {
                             Tensor& gp = g.gradient(p);
                             for (std::size_t k = 0; k < n; ++k) gp[k] += go[offset + k];
                           }
                           offset += n;
                         }
                       });
}

inline Expr concat(std::initializer_list<Expr> parts) {
  return concat(std::span<const Expr>(parts.begin(), parts.size()));
}

// Elements [begin, end) of a vector.
inline Expr slice(Expr x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  detail::require_vector("slice", xv);
  if (begin >= end || end > xv.size()) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for shape " + xv.shape_string());
  }
  const auto src = xv.data().subspan(begin, end - begin);
  const std::size_t xi = x.index;
  return x.graph->record("slice", Tensor::vector(std::vector<double>(src.begin(), src.end())), {xi},
                         [xi, begin](Graph& g, std::size_t self) {
                           const Tensor& go = g.gradient(self);
                           Tensor& gx = g.gradient(xi);
                           for (std::size_t k = 0; k < go.size(); ++k) gx[begin + k] += go[k];
                         });
}

// Element i of a vector, as a scalar.
inline Expr pick(Expr x, std::size_t i) {
  const Tensor& xv = x.value();
  detail::require_vector("pick", xv);
  if (i >= xv.size()) {
    throw ShapeError("pick: index " + std::to_string(i) + " out of range for shape " +
                     xv.shape_string());
  }
  const std::size_t xi = x.index;
  return x.graph->record("pick", Tensor::scalar(xv[i]), {xi}, [xi, i](Graph& g, std::size_t self) {
    g.gradient(xi)[i] += g.gradient(self)[0];
  });
}

inline Expr sum(Expr x) {
  const Tensor& xv = x.value();
  double acc = 0.0;
  for (double v : xv.data()) acc += v;
  const std::size_t xi = x.index;
  return x.graph->record("sum", Tensor::scalar(acc), {xi}, [xi](Graph& g, std::size_t self) {
    const double go = g.gradient(self)[0];
    Tensor& gx = g.gradient(xi);
    for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += go;
  });
}

// Elementwise sum of equally shaped operands.
inline Expr sum(std::span<const Expr> terms) {
  if (terms.empty()) throw ShapeError("sum: no operands");
  const Tensor& first = terms.front().value();
  Tensor out(first.shape());
  std::vector<std::size_t> parents;
  parents.reserve(terms.size());
  for (const Expr& e : terms) {
    const Tensor& v = e.value();
    if (!v.same_shape(first)) detail::shape_mismatch("sum", first, v);
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += v[k];
    parents.push_back(e.index);
  }
  std::vector<std::size_t> ids = parents;
  return terms.front().graph->record(
      "sum", std::move(out), std::move(parents), [ids = std::move(ids)](Graph& g, std::size_t self) {
        const Tensor& go = g.gradient(self);
        for (std::size_t p : ids) {
          if (!g.requires_grad(p)) continue;
          Tensor& gp = g.gradient(p);
          for (std::size_t k = 0; k < go.size(); ++k) gp[k] += go[k];
        }
      });
}

inline Expr dot(Expr a, Expr b) { return sum(cmult(a, b)); }

// log(sum(exp(x))), shifted by the maximum so large inputs stay finite.
inline Expr log_sum_exp(Expr x) {
  const Tensor& xv = x.value();
  detail::require_vector("log_sum_exp", xv);
  const double m = *std::max_element(xv.data().begin(), xv.data().end());
  double acc = 0.0;
  for (double v : xv.data()) acc += std::exp(v - m);
  const std::size_t xi = x.index;
  return x.graph->record("log_sum_exp", Tensor::scalar(m + std::log(acc)), {xi},
                         [xi](Graph& g, std::size_t self) {
                           const double go = g.gradient(self)[0];
                           const double lse = g.value(self)[0];
                           const Tensor& xv = g.value(xi);
                           Tensor& gx = g.gradient(xi);
                           for (std::size_t k = 0; k < xv.size(); ++k) {
                             gx[k] += go * std::exp(xv[k] - lse);
                           }
                         });
}

// Largest element; the gradient goes to the first maximiser.
inline Expr max(Expr x) {
  const Tensor& xv = x.value();
  detail::require_vector("max", xv);
  const auto it = std::max_element(xv.data().begin(), xv.data().end());
  const std::size_t arg = static_cast<std::size_t>(it - xv.data().begin());
  const std::size_t xi = x.index;
  return x.graph->record("max", Tensor::scalar(*it), {xi}, [xi, arg](Graph& g, std::size_t self) {
    g.gradient(xi)[arg] += g.gradient(self)[0];
  });
}

inline Expr zeros(Graph& g, std::size_t n) { return g.constant(Tensor({n})); }

}  // namespace sylparse::ad
