#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sylparse/graph.hpp"

namespace sylparse {

enum class Initializer {
  glorot_uniform,     // U(-sqrt(6/(fan_in+fan_out)), +...) for matrices
  embedding_uniform,  // U(-sqrt(3/dim), +sqrt(3/dim)) per row
  zeros,
};

// Named trainable parameters plus the RNG that initialises them. Parameters
// live in map nodes, so references handed out by add() stay valid for the
// lifetime of the store.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 1) : seed_(seed), rng_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& add(const std::string& name, std::vector<std::size_t> shape, Initializer init) {
    if (params_.count(name)) throw std::invalid_argument("parameter store: duplicate name " + name);
    Parameter p;
    p.name = name;
    p.value = Tensor(shape);
    p.grad = Tensor(shape);
    p.first_moment = Tensor(shape);
    p.second_moment = Tensor(std::move(shape));
    initialize(p.value, init);
    return params_.emplace(name, std::move(p)).first->second;
  }

  Parameter& at(std::string_view name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("parameter store: no parameter " + std::string(name));
    return it->second;
  }
  const Parameter& at(std::string_view name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("parameter store: no parameter " + std::string(name));
    return it->second;
  }
  bool contains(std::string_view name) const { return params_.find(name) != params_.end(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.size();
    return n;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t adam_steps() const { return adam_steps_; }

  void zero_grad() {
    for (auto& [name, p] : params_) p.grad.fill(0.0);
  }

  friend void adam_step(ParameterStore& store, double learning_rate);

 private:
  void initialize(Tensor& t, Initializer init) {
    double limit = 0.0;
    switch (init) {
      case Initializer::zeros:
        return;
      case Initializer::glorot_uniform:
        limit = t.rank() == 2 ? std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()))
                              : std::sqrt(6.0 / static_cast<double>(t.size() + 1));
        break;
      case Initializer::embedding_uniform:
        limit = std::sqrt(3.0 / static_cast<double>(t.rank() == 2 ? t.cols() : t.size()));
        break;
    }
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& x : t.data()) x = dist(rng_);
  }

  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::uint64_t adam_steps_ = 0;
  std::map<std::string, Parameter, std::less<>> params_;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// One bias-corrected Adam update over every parameter, then zero gradients.
inline void adam_step(ParameterStore& store, double learning_rate) {
  const std::uint64_t t = ++store.adam_steps_;
  const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  for (auto& [name, p] : store.params_) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto m = p.first_moment.data();
    auto v = p.second_moment.data();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * g;
      v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
      grad[k] = 0.0;
    }
  }
}

}  // namespace sylparse
