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
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "prefrank/core/activation.hpp"
#include "prefrank/core/common.hpp"
#include "prefrank/core/param_store.hpp"
#include "prefrank/core/tensor.hpp"

namespace prefrank {

struct ValueId {
  std::int32_t index = -1;
  bool valid() const { return index >= 0; }
};

// Shared immutable row-index list; gathers and segment ops hold one so the
// indices outlive the caller's buffers without copies.
using IndexVec = std::shared_ptr<const std::vector<Index>>;

// One forward pass recorded as a flat op list. backward() walks the list in
// reverse creation order, which is a valid reverse topological order because
// every op only consumes previously created values. Gradients accumulate
// additively across all uses of a value; parameter leaves flush into the
// grad accumulator of their Param on the way out.
//
// A tape is single-use: record one forward computation, call backward() at
// most once, then discard.
template <typename Real>
class Tape {
 public:
  using Mat = Matrix<Real>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // ---- leaves ----

  ValueId parameter(Param<Real>& p) {
    Node n;
    n.external_value = &p.value;
    n.param = &p;
    n.requires_grad = true;
    ValueId id = push(std::move(n));
    node(id).backprop = [id](Tape& t) {
      Node& self = t.node(id);
      self.param->grad += self.grad;
    };
    return id;
  }

  ValueId constant(Mat v) {
    Node n;
    n.value = std::move(v);
    n.requires_grad = false;
    return push(std::move(n));
  }

  // Constant backed by caller-owned storage that outlives the tape.
  ValueId constant_ref(const Mat& v) {
    Node n;
    n.external_value = &v;
    n.requires_grad = false;
    return push(std::move(n));
  }

  // ---- primitives ----

  // out.row(t) = x.row(rows[t])
  ValueId gather_rows(ValueId x, const std::vector<Index>& rows) {
    return gather_rows(x, std::make_shared<const std::vector<Index>>(rows));
  }

  ValueId gather_rows(ValueId x, IndexVec rows) {
    const Mat& xv = val(x);
    for (Index r : *rows) {
      if (r < 0 || r >= xv.rows()) {
        throw ShapeError("gather_rows: row index " + std::to_string(r) +
                         " out of range for " + shape_str(xv.rows(), xv.cols()));
      }
    }
    Mat out(static_cast<Index>(rows->size()), xv.cols());
    for (Index t = 0; t < out.rows(); ++t) out.row(t) = xv.row((*rows)[t]);
    ValueId id = make_op(std::move(out), x);
    node(id).backprop = [id, x, rows](Tape& t) {
      const Mat& g = t.node(id).grad;
      if (!t.wants_grad(x)) return;
      Mat& gx = t.grad_accum(x);
      for (Index r = 0; r < g.rows(); ++r) gx.row((*rows)[r]) += g.row(r);
    };
    return id;
  }

  // x * w + b (b broadcast over rows)
  ValueId affine(ValueId x, ValueId w, ValueId b) {
    const Mat& xv = val(x);
    const Mat& wv = val(w);
    const Mat& bv = val(b);
    if (xv.cols() != wv.rows()) {
      throw ShapeError("affine: x " + shape_str(xv.rows(), xv.cols()) +
                       " incompatible with w " + shape_str(wv.rows(), wv.cols()));
    }
    if (bv.rows() != 1 || bv.cols() != wv.cols()) {
      throw ShapeError("affine: bias " + shape_str(bv.rows(), bv.cols()) +
                       " must be " + shape_str(1, wv.cols()));
    }
    Mat out = xv * wv;
    out.rowwise() += bv.row(0);
    ValueId id = make_op(std::move(out), x, w, b);
    node(id).backprop = [id, x, w, b](Tape& t) {
      const Mat& g = t.node(id).grad;
      if (t.wants_grad(x)) t.grad_accum(x).noalias() += g * t.val(w).transpose();
      if (t.wants_grad(w)) t.grad_accum(w).noalias() += t.val(x).transpose() * g;
      if (t.wants_grad(b)) t.grad_accum(b).row(0) += g.colwise().sum();
    };
    return id;
  }

  ValueId matmul(ValueId x, ValueId w) {
    const Mat& xv = val(x);
    const Mat& wv = val(w);
    if (xv.cols() != wv.rows()) {
      throw ShapeError("matmul: x " + shape_str(xv.rows(), xv.cols()) +
                       " incompatible with w " + shape_str(wv.rows(), wv.cols()));
    }
    Mat out = xv * wv;
    ValueId id = make_op(std::move(out), x, w);
    node(id).backprop = [id, x, w](Tape& t) {
      const Mat& g = t.node(id).grad;
      if (t.wants_grad(x)) t.grad_accum(x).noalias() += g * t.val(w).transpose();
      if (t.wants_grad(w)) t.grad_accum(w).noalias() += t.val(x).transpose() * g;
    };
    return id;
  }

  // [x || y] row-wise
  ValueId concat_pairs(ValueId x, ValueId y) {
    const Mat& xv = val(x);
    const Mat& yv = val(y);
    if (xv.rows() != yv.rows()) {
      throw ShapeError("concat_pairs: row mismatch " +
                       shape_str(xv.rows(), xv.cols()) + " vs " +
                       shape_str(yv.rows(), yv.cols()));
    }
    Mat out(xv.rows(), xv.cols() + yv.cols());
    out.leftCols(xv.cols()) = xv;
    out.rightCols(yv.cols()) = yv;
    Index cx = xv.cols();
    Index cy = yv.cols();
    ValueId id = make_op(std::move(out), x, y);
    node(id).backprop = [id, x, y, cx, cy](Tape& t) {
      const Mat& g = t.node(id).grad;
      if (t.wants_grad(x)) t.grad_accum(x) += g.leftCols(cx);
      if (t.wants_grad(y)) t.grad_accum(y) += g.rightCols(cy);
    };
    return id;
  }

  // Softmax within each contiguous segment [offsets[s], offsets[s+1]) of a
  // column of logits. Max-shifted for stability.
  ValueId segment_softmax(ValueId z, IndexVec offsets) {
    const Mat& zv = val(z);
    check_segments(zv, *offsets, "segment_softmax");
    Mat out(zv.rows(), 1);
    const Index num_seg = static_cast<Index>(offsets->size()) - 1;
    for (Index s = 0; s < num_seg; ++s) {
      Index lo = (*offsets)[s], hi = (*offsets)[s + 1];
      if (lo == hi) continue;
      Real mx = zv(lo, 0);
      for (Index t = lo + 1; t < hi; ++t) mx = std::max(mx, zv(t, 0));
      Real sum = Real(0);
      for (Index t = lo; t < hi; ++t) {
        out(t, 0) = std::exp(zv(t, 0) - mx);
        sum += out(t, 0);
      }
      for (Index t = lo; t < hi; ++t) out(t, 0) /= sum;
    }
    ValueId id = make_op(std::move(out), z);
    node(id).backprop = [id, z, offsets](Tape& t) {
      if (!t.wants_grad(z)) return;
      const Mat& g = t.node(id).grad;
      const Mat& a = t.val(id);
      Mat& gz = t.grad_accum(z);
      const Index num_seg = static_cast<Index>(offsets->size()) - 1;
      for (Index s = 0; s < num_seg; ++s) {
        Index lo = (*offsets)[s], hi = (*offsets)[s + 1];
        Real dot = Real(0);
        for (Index i = lo; i < hi; ++i) dot += g(i, 0) * a(i, 0);
        for (Index i = lo; i < hi; ++i) gz(i, 0) += a(i, 0) * (g(i, 0) - dot);
      }
    };
    return id;
  }

  ValueId segment_softmax(ValueId z, const std::vector<Index>& offsets) {
    return segment_softmax(z, std::make_shared<const std::vector<Index>>(offsets));
  }

  // out.row(s) = sum over t in segment s of w(t) * x.row(t).
  // Entries are reduced in ascending t order (fixed summation order).
  ValueId segment_weighted_sum(ValueId x, ValueId w, IndexVec offsets) {
    const Mat& xv = val(x);
    const Mat& wv = val(w);
    check_segments(xv, *offsets, "segment_weighted_sum");
    if (wv.rows() != xv.rows() || wv.cols() != 1) {
      throw ShapeError("segment_weighted_sum: weights " +
                       shape_str(wv.rows(), wv.cols()) + " must be " +
                       shape_str(xv.rows(), 1));
    }
    const Index num_seg = static_cast<Index>(offsets->size()) - 1;
    Mat out = Mat::Zero(num_seg, xv.cols());
    for (Index s = 0; s < num_seg; ++s) {
      for (Index t = (*offsets)[s]; t < (*offsets)[s + 1]; ++t) {
        out.row(s) += wv(t, 0) * xv.row(t);
      }
    }
    ValueId id = make_op(std::move(out), x, w);
    node(id).backprop = [id, x, w, offsets](Tape& t) {
      const Mat& g = t.node(id).grad;
      const Mat& xv = t.val(x);
      const Mat& wv = t.val(w);
      const Index num_seg = static_cast<Index>(offsets->size()) - 1;
      bool gx_wanted = t.wants_grad(x);
      bool gw_wanted = t.wants_grad(w);
      if (!gx_wanted && !gw_wanted) return;
      Mat* gx = gx_wanted ? &t.grad_accum(x) : nullptr;
      Mat* gw = gw_wanted ? &t.grad_accum(w) : nullptr;
      for (Index s = 0; s < num_seg; ++s) {
        for (Index i = (*offsets)[s]; i < (*offsets)[s + 1]; ++i) {
          if (gx) gx->row(i) += wv(i, 0) * g.row(s);
          if (gw) (*gw)(i, 0) += xv.row(i).dot(g.row(s));
        }
      }
    };
    return id;
  }

  ValueId segment_weighted_sum(ValueId x, ValueId w,
                               const std::vector<Index>& offsets) {
    return segment_weighted_sum(x, w,
                                std::make_shared<const std::vector<Index>>(offsets));
  }

  ValueId activation(ValueId x, Activation a) {
    const Mat& xv = val(x);
    Mat out = xv.unaryExpr([a](Real v) { return act_forward(a, v); });
    ValueId id = make_op(std::move(out), x);
    node(id).backprop = [id, x, a](Tape& t) {
      if (!t.wants_grad(x)) return;
      const Mat& g = t.node(id).grad;
      const Mat& xv = t.val(x);
      const Mat& yv = t.val(id);
      Mat& gx = t.grad_accum(x);
      for (Index r = 0; r < g.rows(); ++r) {
        for (Index c = 0; c < g.cols(); ++c) {
          gx(r, c) += g(r, c) * act_backward(a, xv(r, c), yv(r, c));
        }
      }
    };
    return id;
  }

  ValueId leaky_relu(ValueId x, Real slope = Real(0.2)) {
    return activation(x, Activation::leaky_relu(static_cast<double>(slope)));
  }

  ValueId sigmoid(ValueId x) { return activation(x, Activation::sigmoid()); }

  // out(r) = x.row(r) . y.row(r)
  ValueId dot_rows(ValueId x, ValueId y) {
    const Mat& xv = val(x);
    const Mat& yv = val(y);
    require_same_shape(xv, yv, "dot_rows");
    Mat out(xv.rows(), 1);
    for (Index r = 0; r < xv.rows(); ++r) out(r, 0) = xv.row(r).dot(yv.row(r));
    ValueId id = make_op(std::move(out), x, y);
    node(id).backprop = [id, x, y](Tape& t) {
      const Mat& g = t.node(id).grad;
      const Mat& xv = t.val(x);
      const Mat& yv = t.val(y);
      if (t.wants_grad(x)) {
        Mat& gx = t.grad_accum(x);
        for (Index r = 0; r < g.rows(); ++r) gx.row(r) += g(r, 0) * yv.row(r);
      }
      if (t.wants_grad(y)) {
        Mat& gy = t.grad_accum(y);
        for (Index r = 0; r < g.rows(); ++r) gy.row(r) += g(r, 0) * xv.row(r);
      }
    };
    return id;
  }

  // Inverted dropout. Zeroes entries with probability p and scales survivors
  // by 1/(1-p) in training mode; identity in eval mode or when p == 0.
  ValueId dropout(ValueId x, Real p, Rng& rng, bool train_mode) {
    if (p < Real(0) || p >= Real(1)) {
      throw ConfigError("dropout: p must be in [0, 1)");
    }
    if (!train_mode || p == Real(0)) return x;
    Real keep_scale = Real(1) / (Real(1) - p);
    Mat mask;
    Mat out;
    {
      // Finish all reads of the input before adding nodes: growing the node
      // array invalidates references into it.
      const Mat& xv = val(x);
      mask.resize(xv.rows(), xv.cols());
      for (Index r = 0; r < mask.rows(); ++r) {
        for (Index c = 0; c < mask.cols(); ++c) {
          mask(r, c) =
              rng.uniform() < static_cast<double>(p) ? Real(0) : keep_scale;
        }
      }
      out = xv.cwiseProduct(mask);
    }
    ValueId mask_id = constant(std::move(mask));
    ValueId id = make_op(std::move(out), x);
    node(id).backprop = [id, x, mask_id](Tape& t) {
      if (!t.wants_grad(x)) return;
      t.grad_accum(x) += t.node(id).grad.cwiseProduct(t.val(mask_id));
    };
    return id;
  }

  // log(1 + exp(x)), overflow-safe
  ValueId softplus(ValueId x) {
    const Mat& xv = val(x);
    Mat out = xv.unaryExpr([](Real v) {
      return std::max(v, Real(0)) + std::log1p(std::exp(-std::abs(v)));
    });
    ValueId id = make_op(std::move(out), x);
    node(id).backprop = [id, x](Tape& t) {
      if (!t.wants_grad(x)) return;
      const Mat& g = t.node(id).grad;
      const Mat& xv = t.val(x);
      Mat& gx = t.grad_accum(x);
      for (Index r = 0; r < g.rows(); ++r) {
        for (Index c = 0; c < g.cols(); ++c) {
          gx(r, c) += g(r, c) * stable_sigmoid(xv(r, c));
        }
      }
    };
    return id;
  }

  ValueId add(ValueId x, ValueId y) {
    require_same_shape(val(x), val(y), "add");
    Mat out = val(x) + val(y);
    ValueId id = make_op(std::move(out), x, y);
    node(id).backprop = [id, x, y](Tape& t) {
      const Mat& g = t.node(id).grad;
      if (t.wants_grad(x)) t.grad_accum(x) += g;
      if (t.wants_grad(y)) t.grad_accum(y) += g;
    };
    return id;
  }

  ValueId sub(ValueId x, ValueId y) {
    require_same_shape(val(x), val(y), "sub");
    Mat out = val(x) - val(y);
    ValueId id = make_op(std::move(out), x, y);
    node(id).backprop = [id, x, y](Tape& t) {
      const Mat& g = t.node(id).grad;
      if (t.wants_grad(x)) t.grad_accum(x) += g;
      if (t.wants_grad(y)) t.grad_accum(y) -= g;
    };
    return id;
  }

  ValueId neg(ValueId x) { return scale(x, Real(-1)); }

  ValueId scale(ValueId x, Real c) {
    Mat out = c * val(x);
    ValueId id = make_op(std::move(out), x);
    node(id).backprop = [id, x, c](Tape& t) {
      if (t.wants_grad(x)) t.grad_accum(x) += c * t.node(id).grad;
    };
    return id;
  }

  // Reduce to a 1x1 scalar.
  ValueId sum(ValueId x) {
    Mat out(1, 1);
    out(0, 0) = val(x).sum();
    ValueId id = make_op(std::move(out), x);
    node(id).backprop = [id, x](Tape& t) {
      if (t.wants_grad(x)) {
        t.grad_accum(x).array() += t.node(id).grad(0, 0);
      }
    };
    return id;
  }

  // ---- accessors ----

  const Mat& val(ValueId id) const {
    const Node& n = node(id);
    return n.external_value ? *n.external_value : n.value;
  }

  Real scalar(ValueId id) const {
    const Mat& v = val(id);
    if (v.rows() != 1 || v.cols() != 1) {
      throw ShapeError("scalar: value has shape " + shape_str(v.rows(), v.cols()));
    }
    return v(0, 0);
  }

  std::size_t size() const { return nodes_.size(); }

  // ---- reverse pass ----

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients for every recorded
  // value, flushing parameter leaves into their Param::grad buffers.
  void backward(ValueId loss) {
    if (!loss.valid() || static_cast<std::size_t>(loss.index) >= nodes_.size()) {
      throw ConfigError("backward: loss was not produced on this tape");
    }
    if (consumed_) {
      throw ConfigError("backward: tape already consumed");
    }
    const Mat& lv = val(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ShapeError("backward: loss must be scalar, got " +
                       shape_str(lv.rows(), lv.cols()));
    }
    if (!std::isfinite(static_cast<double>(lv(0, 0)))) {
      throw NumericError("backward: loss is non-finite");
    }
    consumed_ = true;
    grad_accum(loss)(0, 0) = Real(1);
    for (std::int32_t i = loss.index; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.backprop || n.grad.size() == 0) continue;
      n.backprop(*this);
    }
  }

 private:
  struct Node {
    Mat value;
    const Mat* external_value = nullptr;
    Mat grad;
    std::function<void(Tape&)> backprop;
    Param<Real>* param = nullptr;
    bool requires_grad = false;
  };

  Node& node(ValueId id) {
    if (!id.valid() || static_cast<std::size_t>(id.index) >= nodes_.size()) {
      throw ConfigError("tape: invalid value id");
    }
    return nodes_[static_cast<std::size_t>(id.index)];
  }
  const Node& node(ValueId id) const {
    return const_cast<Tape*>(this)->node(id);
  }

  bool wants_grad(ValueId id) { return node(id).requires_grad; }

  Mat& grad_accum(ValueId id) {
    Node& n = node(id);
    if (n.grad.size() == 0) {
      const Mat& v = n.external_value ? *n.external_value : n.value;
      n.grad = Mat::Zero(v.rows(), v.cols());
    }
    return n.grad;
  }

  ValueId push(Node n) {
    nodes_.push_back(std::move(n));
    return ValueId{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  template <typename... Ids>
  ValueId make_op(Mat value, Ids... inputs) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = (node(inputs).requires_grad || ...);
    return push(std::move(n));
  }

  void check_segments(const Mat& x, const std::vector<Index>& offsets,
                      const char* op) const {
    if (offsets.empty() || offsets.front() != 0 ||
        offsets.back() != x.rows()) {
      throw ShapeError(std::string(op) + ": segment offsets do not cover " +
                       std::to_string(x.rows()) + " rows");
    }
    for (std::size_t s = 1; s < offsets.size(); ++s) {
      if (offsets[s] < offsets[s - 1]) {
        throw ShapeError(std::string(op) + ": segment offsets not monotone");
      }
    }
  }

  // deque: references handed out by val()/node() survive later pushes.
  std::deque<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace prefrank
