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
#include <string>

#include "prefrank/core/common.hpp"

namespace prefrank {

enum class ActKind { kLeakyRelu, kRelu, kSigmoid, kTanh, kIdentity };

// Nonlinearity applied inside convolutional layers and the attention MLP.
struct Activation {
  ActKind kind = ActKind::kLeakyRelu;
  double leaky_slope = 0.2;

  static Activation leaky_relu(double slope = 0.2) {
    return {ActKind::kLeakyRelu, slope};
  }
  static Activation identity() { return {ActKind::kIdentity, 0.0}; }
  static Activation sigmoid() { return {ActKind::kSigmoid, 0.0}; }
  static Activation relu() { return {ActKind::kRelu, 0.0}; }
  static Activation tanh() { return {ActKind::kTanh, 0.0}; }
};

template <typename Real>
Real stable_sigmoid(Real x) {
  if (x >= Real(0)) {
    return Real(1) / (Real(1) + std::exp(-x));
  }
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

template <typename Real>
Real act_forward(const Activation& a, Real x) {
  switch (a.kind) {
    case ActKind::kLeakyRelu:
      return x > Real(0) ? x : Real(a.leaky_slope) * x;
    case ActKind::kRelu:
      return x > Real(0) ? x : Real(0);
    case ActKind::kSigmoid:
      return stable_sigmoid(x);
    case ActKind::kTanh:
      return std::tanh(x);
    case ActKind::kIdentity:
      return x;
  }
  return x;
}

// Derivative in terms of the input x and the already-computed output y.
template <typename Real>
Real act_backward(const Activation& a, Real x, Real y) {
  switch (a.kind) {
    case ActKind::kLeakyRelu:
      return x > Real(0) ? Real(1) : Real(a.leaky_slope);
    case ActKind::kRelu:
      return x > Real(0) ? Real(1) : Real(0);
    case ActKind::kSigmoid:
      return y * (Real(1) - y);
    case ActKind::kTanh:
      return Real(1) - y * y;
    case ActKind::kIdentity:
      return Real(1);
  }
  return Real(1);
}

inline std::string act_name(ActKind k) {
  switch (k) {
    case ActKind::kLeakyRelu: return "leaky_relu";
    case ActKind::kRelu: return "relu";
    case ActKind::kSigmoid: return "sigmoid";
    case ActKind::kTanh: return "tanh";
    case ActKind::kIdentity: return "identity";
  }
  return "?";
}

inline ActKind act_from_name(const std::string& s) {
  if (s == "leaky_relu") return ActKind::kLeakyRelu;
  if (s == "relu") return ActKind::kRelu;
  if (s == "sigmoid") return ActKind::kSigmoid;
  if (s == "tanh") return ActKind::kTanh;
  if (s == "identity") return ActKind::kIdentity;
  throw ConfigError("unknown activation '" + s + "'");
}

}  // namespace prefrank
