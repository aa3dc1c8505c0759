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

#include "prefrank/core/common.hpp"
#include "prefrank/core/tensor.hpp"

namespace prefrank {

// Xavier/Glorot uniform: entries in [-a, a] with a = sqrt(6 / (fan_in + fan_out)),
// fan_in = rows, fan_out = cols. Deterministic per seed.
template <typename Real>
Matrix<Real> xavier_init(Index rows, Index cols, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("xavier_init: empty shape " + shape_str(rows, cols));
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Rng rng(seed);
  Matrix<Real> out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      out(r, c) = static_cast<Real>(rng.uniform(-bound, bound));
    }
  }
  return out;
}

}  // namespace prefrank
