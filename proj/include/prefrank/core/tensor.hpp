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

#include <Eigen/Dense>
#include <string>

#include "prefrank/core/common.hpp"

namespace prefrank {

// Row-major so that a row (one entity's representation) is contiguous.
template <typename Real>
using Matrix =
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

inline std::string shape_str(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename Real>
void require_same_shape(const Matrix<Real>& a, const Matrix<Real>& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.rows(), a.cols()) + " vs " +
                     shape_str(b.rows(), b.cols()));
  }
}

template <typename Real>
void require_finite(const Matrix<Real>& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite values in tensor of shape " +
                       shape_str(m.rows(), m.cols()));
  }
}

}  // namespace prefrank
