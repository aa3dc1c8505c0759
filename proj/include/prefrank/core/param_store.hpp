// Copyright 2026 The prefrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "prefrank/core/common.hpp"
#include "prefrank/core/tensor.hpp"

namespace prefrank {

// A trainable tensor plus its gradient accumulator and Adam moments.
template <typename Real>
struct Param {
  std::string name;
  Matrix<Real> value;
  Matrix<Real> grad;
  Matrix<Real> m1;  // first moment
  Matrix<Real> m2;  // second moment

  Index rows() const { return value.rows(); }
  Index cols() const { return value.cols(); }
};

template <typename Real>
struct AdamConfig {
  Real lr = Real(1e-4);
  Real l2 = Real(1e-6);
  bool l2_embedding_only = false;  // restrict weight decay to "embedding"
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real eps = Real(1e-8);
};

// Ordered collection of named parameters with shared Adam step state.
// Iteration order is insertion order, so two stores built and updated the
// same way stay bit-identical.
template <typename Real>
class ParamStore {
 public:
  Param<Real>& add(const std::string& name, Index rows, Index cols) {
    if (index_.count(name)) {
      throw ConfigError("parameter '" + name + "' already exists");
    }
    if (rows <= 0 || cols <= 0) {
      throw ConfigError("parameter '" + name + "' has empty shape " +
                        shape_str(rows, cols));
    }
    params_.emplace_back();
    Param<Real>& p = params_.back();
    p.name = name;
    p.value = Matrix<Real>::Zero(rows, cols);
    p.grad = Matrix<Real>::Zero(rows, cols);
    p.m1 = Matrix<Real>::Zero(rows, cols);
    p.m2 = Matrix<Real>::Zero(rows, cols);
    index_[name] = params_.size() - 1;
    return p;
  }

  Param<Real>& add(const std::string& name, Matrix<Real> value) {
    Param<Real>& p = add(name, value.rows(), value.cols());
    p.value = std::move(value);
    return p;
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  Param<Real>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("no parameter named '" + name + "'");
    return params_[it->second];
  }
  const Param<Real>& at(const std::string& name) const {
    return const_cast<ParamStore*>(this)->at(name);
  }

  std::size_t size() const { return params_.size(); }
  std::int64_t step() const { return step_; }
  void set_step(std::int64_t t) { step_ = t; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grads() {
    for (auto& p : params_) p.grad.setZero();
  }

  // Bias-corrected Adam on every parameter, driven by grad + l2 * value.
  // Rejects non-finite gradients before touching any state.
  void adam_step(const AdamConfig<Real>& cfg) {
    for (const auto& p : params_) {
      if (!p.grad.allFinite()) {
        throw NumericError("adam_step: non-finite gradient for '" + p.name + "'");
      }
    }
    ++step_;
    const Real bc1 = Real(1) - std::pow(cfg.beta1, Real(step_));
    const Real bc2 = Real(1) - std::pow(cfg.beta2, Real(step_));
    for (auto& p : params_) {
      const Real l2 =
          (cfg.l2_embedding_only && p.name != "embedding") ? Real(0) : cfg.l2;
      Matrix<Real> g = p.grad + l2 * p.value;
      p.m1 = cfg.beta1 * p.m1 + (Real(1) - cfg.beta1) * g;
      p.m2 = cfg.beta2 * p.m2 + (Real(1) - cfg.beta2) * g.cwiseProduct(g);
      p.value.array() -= cfg.lr * (p.m1.array() / bc1) /
                         ((p.m2.array() / bc2).sqrt() + cfg.eps);
    }
  }

  // Deep copy of values and optimizer state.
  ParamStore clone() const { return *this; }

  void copy_values_from(const ParamStore& other) {
    if (other.size() != size()) {
      throw ConfigError("copy_values_from: stores have different parameter sets");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name != other.params_[i].name) {
        throw ConfigError("copy_values_from: parameter order differs at '" +
                          params_[i].name + "'");
      }
      params_[i].value = other.params_[i].value;
      params_[i].m1 = other.params_[i].m1;
      params_[i].m2 = other.params_[i].m2;
    }
    step_ = other.step_;
  }

 private:
  // deque: Param addresses stay stable across add(), and tape leaves hold
  // pointers into the store for the duration of a step.
  std::deque<Param<Real>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::int64_t step_ = 0;
};

}  // namespace prefrank
