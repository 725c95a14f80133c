// Copyright 2026 The CCGVAE Authors.
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

#ifndef CCGVAE_AUTODIFF_H_
#define CCGVAE_AUTODIFF_H_

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccgvae/tensor.h"

namespace ccgvae {

// Trainable tensor with a gradient accumulator of the same shape.
template <typename T>
struct BasicParameter {
  BasicParameter(std::string n, BasicTensor<T> v)
      : name(std::move(n)), value(std::move(v)),
        grad(value.rows(), value.cols()) {}

  void zeroGrad() { grad.fill(T(0)); }

  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
};

using Parameter = BasicParameter<float>;

template <typename T>
class BasicTape;

// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
template <typename T>
class BasicVar {
 public:
  BasicVar() = default;

  BasicTape<T>* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const BasicTensor<T>& value() const { return tape_->value(*this); }
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }

 private:
  friend class BasicTape<T>;
  BasicVar(BasicTape<T>* tape, int id) : tape_(tape), id_(id) {}

  BasicTape<T>* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order, which is a
// topological order, so backward is a single reverse sweep. With gradients
// disabled the tape only stores values and records no closures.
template <typename T>
class BasicTape {
 public:
  using TensorT = BasicTensor<T>;
  using VarT = BasicVar<T>;
  // Called with the node's output value and output gradient.
  using BackwardFn =
      std::function<void(BasicTape&, const TensorT&, const TensorT&)>;

  explicit BasicTape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  bool gradEnabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  VarT constant(TensorT value) { return push(std::move(value), false, {}); }

  // Differentiable leaf whose gradient can be read back with grad().
  VarT variable(TensorT value) {
    return push(std::move(value), grad_enabled_, {});
  }

  // Leaf bound to a parameter; backward() adds into p.grad. Repeated calls
  // with the same parameter return the same node.
  VarT parameter(BasicParameter<T>& p) {
    const auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return VarT(this, it->second);
    VarT v = push(p.value, grad_enabled_, {});
    nodes_[v.id_].param = &p;
    param_nodes_.emplace(&p, v.id_);
    return v;
  }

  const TensorT& value(VarT v) const { return node(v).value; }

  // Gradient of the last backward() loss with respect to `v`; zeros when the
  // loss does not depend on it.
  TensorT grad(VarT v) const {
    const Node& n = node(v);
    if (n.grad.size() == 0) return TensorT(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool needsGrad(VarT v) const { return node(v).needs_grad; }

  // Records an op result. `fn` pushes gradient contributions to the inputs
  // through gradBuffer().
  VarT record(TensorT value, std::initializer_list<VarT> inputs,
              BackwardFn fn) {
    return record(std::move(value), std::span<const VarT>(inputs.begin(),
                                                          inputs.size()),
                  std::move(fn));
  }
  VarT record(TensorT value, std::span<const VarT> inputs, BackwardFn fn) {
    bool needs = false;
    for (const VarT& in : inputs) {
      check(in);
      needs = needs || node(in).needs_grad;
    }
    if (!needs) return push(std::move(value), false, {});
    return push(std::move(value), true, std::move(fn));
  }

  // Mutable gradient buffer of an input, allocated on first use. Returns
  // nullptr when the input does not need a gradient.
  TensorT* gradBuffer(VarT v) {
    Node& n = nodes_[v.id_];
    if (!n.needs_grad) return nullptr;
    if (n.grad.size() == 0 && n.value.size() != 0) {
      n.grad = TensorT(n.value.rows(), n.value.cols());
    }
    return &n.grad;
  }

  void backward(VarT loss) {
    check(loss);
    if (consumed_) throw std::logic_error("backward called twice on one tape");
    const TensorT& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ShapeError("backward needs a scalar loss, got " + lv.shapeString());
    }
    consumed_ = true;
    if (!node(loss).needs_grad) return;
    gradBuffer(loss)->fill(T(1));
    for (int i = loss.id_; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n.value, n.grad);
    }
    for (Node& n : nodes_) {
      if (n.param != nullptr && n.grad.size() != 0) {
        n.param->grad.mat() += n.grad.mat();
      }
    }
  }

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    BackwardFn backward;
    BasicParameter<T>* param = nullptr;
    bool needs_grad = false;
  };

  VarT push(TensorT value, bool needs_grad, BackwardFn fn) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad && grad_enabled_;
    if (n.needs_grad) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return VarT(this, static_cast<int>(nodes_.size()) - 1);
  }

  void check(VarT v) const {
    if (v.tape_ != this || v.id_ < 0 ||
        v.id_ >= static_cast<int>(nodes_.size())) {
      throw std::invalid_argument("variable does not belong to this tape");
    }
  }
  const Node& node(VarT v) const {
    check(v);
    return nodes_[v.id_];
  }

  bool grad_enabled_;
  bool consumed_ = false;
  // A deque keeps references returned by value() valid as nodes are added.
  std::deque<Node> nodes_;
  std::unordered_map<const BasicParameter<T>*, int> param_nodes_;
};

using Tape = BasicTape<float>;
using Var = BasicVar<float>;

namespace ad_detail {

template <typename T>
void requireSameShape(const BasicTensor<T>& a, const BasicTensor<T>& b,
                      const char* op) {
  if (!a.sameShape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shapeString() +
                     " vs " + b.shapeString());
  }
}

template <typename T>
BasicTape<T>& tapeOf(BasicVar<T> a) {
  if (!a.valid()) throw std::invalid_argument("unbound variable");
  return *a.tape();
}

template <typename T, typename F, typename D>
BasicVar<T> unary(BasicVar<T> a, F f, D dfdx) {
  auto& tape = tapeOf(a);
  const auto& x = a.value();
  BasicTensor<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return tape.record(
      std::move(out), {a},
      [a, dfdx](BasicTape<T>& t, const BasicTensor<T>& y,
                const BasicTensor<T>& g) {
        auto* ga = t.gradBuffer(a);
        if (!ga) return;
        const auto& x = t.value(a);
        for (std::size_t i = 0; i < x.size(); ++i) {
          (*ga)[i] += g[i] * dfdx(x[i], y[i]);
        }
      });
}

}  // namespace ad_detail

// a (r x k) times b (k x c).
template <typename T>
BasicVar<T> matmul(BasicVar<T> a, BasicVar<T> b) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  const auto& y = b.value();
  if (x.cols() != y.rows()) {
    throw ShapeError("matmul: " + x.shapeString() + " x " + y.shapeString());
  }
  BasicTensor<T> out(x.rows(), y.cols());
  out.mat().noalias() = x.mat() * y.mat();
  return tape.record(std::move(out), {a, b},
                     [a, b](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) {
                         ga->mat().noalias() += g.mat() * t.value(b).mat().transpose();
                       }
                       if (auto* gb = t.gradBuffer(b)) {
                         gb->mat().noalias() += t.value(a).mat().transpose() * g.mat();
                       }
                     });
}

// Elementwise a + b; b may also be a single row broadcast over a's rows.
template <typename T>
BasicVar<T> add(BasicVar<T> a, BasicVar<T> b) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  const auto& y = b.value();
  const bool broadcast = y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols();
  if (!broadcast) ad_detail::requireSameShape(x, y, "add");
  BasicTensor<T> out = x;
  if (broadcast) {
    out.mat().rowwise() += y.mat().row(0);
  } else {
    out.mat() += y.mat();
  }
  return tape.record(std::move(out), {a, b},
                     [a, b, broadcast](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) ga->mat() += g.mat();
                       if (auto* gb = t.gradBuffer(b)) {
                         if (broadcast) {
                           gb->mat() += g.mat().colwise().sum();
                         } else {
                           gb->mat() += g.mat();
                         }
                       }
                     });
}

// Elementwise a - b with the same broadcasting rule as add.
template <typename T>
BasicVar<T> sub(BasicVar<T> a, BasicVar<T> b) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  const auto& y = b.value();
  const bool broadcast = y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols();
  if (!broadcast) ad_detail::requireSameShape(x, y, "sub");
  BasicTensor<T> out = x;
  if (broadcast) {
    out.mat().rowwise() -= y.mat().row(0);
  } else {
    out.mat() -= y.mat();
  }
  return tape.record(std::move(out), {a, b},
                     [a, b, broadcast](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) ga->mat() += g.mat();
                       if (auto* gb = t.gradBuffer(b)) {
                         if (broadcast) {
                           gb->mat() -= g.mat().colwise().sum();
                         } else {
                           gb->mat() -= g.mat();
                         }
                       }
                     });
}

// Elementwise product of equally shaped tensors.
template <typename T>
BasicVar<T> mul(BasicVar<T> a, BasicVar<T> b) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  const auto& y = b.value();
  ad_detail::requireSameShape(x, y, "mul");
  BasicTensor<T> out(x.rows(), x.cols());
  out.mat() = x.mat().cwiseProduct(y.mat());
  return tape.record(std::move(out), {a, b},
                     [a, b](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) {
                         ga->mat() += g.mat().cwiseProduct(t.value(b).mat());
                       }
                       if (auto* gb = t.gradBuffer(b)) {
                         gb->mat() += g.mat().cwiseProduct(t.value(a).mat());
                       }
                     });
}

template <typename T>
BasicVar<T> scale(BasicVar<T> a, T s) {
  auto& tape = ad_detail::tapeOf(a);
  BasicTensor<T> out = a.value();
  out.mat() *= s;
  return tape.record(std::move(out), {a},
                     [a, s](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) ga->mat() += s * g.mat();
                     });
}

// s - a, elementwise.
template <typename T>
BasicVar<T> rsubScalar(T s, BasicVar<T> a) {
  auto& tape = ad_detail::tapeOf(a);
  BasicTensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s - out[i];
  return tape.record(std::move(out), {a},
                     [a](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) ga->mat() -= g.mat();
                     });
}

// Side-by-side concatenation of tensors with equal row counts.
template <typename T>
BasicVar<T> concatCols(std::span<const BasicVar<T>> parts) {
  if (parts.empty()) throw ShapeError("concatCols of nothing");
  auto& tape = ad_detail::tapeOf(parts[0]);
  const int rows = parts[0].rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concatCols: row count mismatch");
    cols += p.cols();
  }
  BasicTensor<T> out(rows, cols);
  int off = 0;
  for (const auto& p : parts) {
    out.mat().middleCols(off, p.cols()) = p.value().mat();
    off += p.cols();
  }
  std::vector<BasicVar<T>> ins(parts.begin(), parts.end());
  return tape.record(std::move(out), parts,
                     [ins](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       int off = 0;
                       for (const auto& p : ins) {
                         const int c = t.value(p).cols();
                         if (auto* gp = t.gradBuffer(p)) {
                           gp->mat() += g.mat().middleCols(off, c);
                         }
                         off += c;
                       }
                     });
}
template <typename T>
BasicVar<T> concatCols(std::initializer_list<BasicVar<T>> parts) {
  return concatCols(std::span<const BasicVar<T>>(parts.begin(), parts.size()));
}

// Vertical stacking of tensors with equal column counts.
template <typename T>
BasicVar<T> concatRows(std::span<const BasicVar<T>> parts) {
  if (parts.empty()) throw ShapeError("concatRows of nothing");
  auto& tape = ad_detail::tapeOf(parts[0]);
  const int cols = parts[0].cols();
  int rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concatRows: column count mismatch");
    rows += p.rows();
  }
  BasicTensor<T> out(rows, cols);
  int off = 0;
  for (const auto& p : parts) {
    out.mat().middleRows(off, p.rows()) = p.value().mat();
    off += p.rows();
  }
  std::vector<BasicVar<T>> ins(parts.begin(), parts.end());
  return tape.record(std::move(out), parts,
                     [ins](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       int off = 0;
                       for (const auto& p : ins) {
                         const int r = t.value(p).rows();
                         if (auto* gp = t.gradBuffer(p)) {
                           gp->mat() += g.mat().middleRows(off, r);
                         }
                         off += r;
                       }
                     });
}
template <typename T>
BasicVar<T> concatRows(std::initializer_list<BasicVar<T>> parts) {
  return concatRows(std::span<const BasicVar<T>>(parts.begin(), parts.size()));
}

template <typename T>
BasicVar<T> sliceRows(BasicVar<T> a, int start, int count) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw ShapeError("sliceRows out of range for " + x.shapeString());
  }
  BasicTensor<T> out(count, x.cols());
  out.mat() = x.mat().middleRows(start, count);
  return tape.record(std::move(out), {a},
                     [a, start, count](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) {
                         ga->mat().middleRows(start, count) += g.mat();
                       }
                     });
}

template <typename T>
BasicVar<T> sliceCols(BasicVar<T> a, int start, int count) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw ShapeError("sliceCols out of range for " + x.shapeString());
  }
  BasicTensor<T> out(x.rows(), count);
  out.mat() = x.mat().middleCols(start, count);
  return tape.record(std::move(out), {a},
                     [a, start, count](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) {
                         ga->mat().middleCols(start, count) += g.mat();
                       }
                     });
}

// Rows of `a` picked by index (repeats allowed; gradients scatter-add).
template <typename T>
BasicVar<T> gatherRows(BasicVar<T> a, std::vector<int> index) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  BasicTensor<T> out(static_cast<int>(index.size()), x.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || index[r] >= x.rows()) {
      throw ShapeError("gatherRows index " + std::to_string(index[r]) +
                       " out of range for " + x.shapeString());
    }
    out.mat().row(r) = x.mat().row(index[r]);
  }
  return tape.record(std::move(out), {a},
                     [a, index = std::move(index)](BasicTape<T>& t,
                                                   const BasicTensor<T>&,
                                                   const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) {
                         for (std::size_t r = 0; r < index.size(); ++r) {
                           ga->mat().row(index[r]) += g.mat().row(r);
                         }
                       }
                     });
}

template <typename T>
BasicVar<T> transpose(BasicVar<T> a) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  BasicTensor<T> out(x.cols(), x.rows());
  out.mat() = x.mat().transpose();
  return tape.record(std::move(out), {a},
                     [a](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) ga->mat() += g.mat().transpose();
                     });
}

// Sum of all entries, 1 x 1.
template <typename T>
BasicVar<T> sum(BasicVar<T> a) {
  auto& tape = ad_detail::tapeOf(a);
  double acc = 0.0;
  for (const T v : a.value().values()) acc += v;
  return tape.record(BasicTensor<T>::scalar(static_cast<T>(acc)), {a},
                     [a](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) ga->mat().array() += g[0];
                     });
}

// Mean of all entries, 1 x 1.
template <typename T>
BasicVar<T> mean(BasicVar<T> a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), static_cast<T>(1.0 / static_cast<double>(n)));
}

// Column-wise mean over rows: (r x c) -> (1 x c).
template <typename T>
BasicVar<T> meanRows(BasicVar<T> a) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  if (x.rows() == 0) throw ShapeError("meanRows of a tensor with no rows");
  BasicTensor<T> out(1, x.cols());
  const T inv = static_cast<T>(1.0 / x.rows());
  out.mat() = x.mat().colwise().sum() * inv;
  return tape.record(std::move(out), {a},
                     [a, inv](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
                       if (auto* ga = t.gradBuffer(a)) {
                         ga->mat().rowwise() += inv * g.mat().row(0);
                       }
                     });
}

template <typename T>
BasicVar<T> sigmoid(BasicVar<T> a) {
  return ad_detail::unary(
      a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
BasicVar<T> tanh(BasicVar<T> a) {
  return ad_detail::unary(
      a, [](T x) { return std::tanh(x); },
      [](T, T y) { return T(1) - y * y; });
}

template <typename T>
BasicVar<T> relu(BasicVar<T> a) {
  return ad_detail::unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
BasicVar<T> exp(BasicVar<T> a) {
  return ad_detail::unary(
      a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
BasicVar<T> log(BasicVar<T> a) {
  return ad_detail::unary(
      a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

// Row-wise softmax restricted to entries with mask != 0. Masked outputs are
// exactly zero. Throws if a row has no unmasked entry.
template <typename T>
BasicVar<T> maskedSoftmax(BasicVar<T> a, std::vector<std::uint8_t> mask) {
  auto& tape = ad_detail::tapeOf(a);
  const auto& x = a.value();
  if (mask.size() != x.size()) {
    throw ShapeError("maskedSoftmax: mask has " + std::to_string(mask.size()) +
                     " entries for a " + x.shapeString() + " tensor");
  }
  BasicTensor<T> out(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * x.cols();
    T hi = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (int c = 0; c < x.cols(); ++c) {
      if (mask[base + c]) {
        hi = std::max(hi, x[base + c]);
        any = true;
      }
    }
    if (!any) throw std::invalid_argument("maskedSoftmax: every entry masked");
    double total = 0.0;
    for (int c = 0; c < x.cols(); ++c) {
      if (mask[base + c]) {
        out[base + c] = std::exp(x[base + c] - hi);
        total += out[base + c];
      }
    }
    for (int c = 0; c < x.cols(); ++c) {
      if (mask[base + c]) out[base + c] = static_cast<T>(out[base + c] / total);
    }
  }
  return tape.record(
      std::move(out), {a},
      [a](BasicTape<T>& t, const BasicTensor<T>& y, const BasicTensor<T>& g) {
        auto* ga = t.gradBuffer(a);
        if (!ga) return;
        for (int r = 0; r < y.rows(); ++r) {
          double dot = 0.0;
          for (int c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
          for (int c = 0; c < y.cols(); ++c) {
            (*ga)(r, c) += y(r, c) * static_cast<T>(g(r, c) - dot);
          }
        }
      });
}

// -log max(p[target], 1e-12) for a 1 x n probability row. An optional mask
// rejects masked targets.
template <typename T>
BasicVar<T> crossEntropy(BasicVar<T> p, int target,
                         std::span<const std::uint8_t> mask = {}) {
  auto& tape = ad_detail::tapeOf(p);
  const auto& x = p.value();
  if (x.rows() != 1) throw ShapeError("crossEntropy expects a single row");
  if (target < 0 || target >= x.cols()) {
    throw std::out_of_range("crossEntropy target " + std::to_string(target) +
                            " outside 0.." + std::to_string(x.cols() - 1));
  }
  if (!mask.empty() && !mask[target]) {
    throw std::invalid_argument("crossEntropy target " +
                                std::to_string(target) + " is masked");
  }
  constexpr T kFloor = T(1e-12);
  const T pt = x[target];
  const bool clamped = !(pt > kFloor);
  return tape.record(
      BasicTensor<T>::scalar(-std::log(clamped ? kFloor : pt)), {p},
      [p, target, clamped](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
        if (clamped) return;
        if (auto* gp = t.gradBuffer(p)) (*gp)[target] -= g[0] / t.value(p)[target];
      });
}

// 0.5 * sum(mu^2 + exp(lv) - 1 - lv) / rows: KL(N(mu, exp(lv)) || N(0, I))
// summed over dimensions and averaged over rows.
template <typename T>
BasicVar<T> gaussianKL(BasicVar<T> mu, BasicVar<T> log_var) {
  auto& tape = ad_detail::tapeOf(mu);
  const auto& m = mu.value();
  const auto& lv = log_var.value();
  ad_detail::requireSameShape(m, lv, "gaussianKL");
  if (m.rows() == 0) throw ShapeError("gaussianKL of an empty tensor");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    acc += static_cast<double>(m[i]) * m[i] + std::exp(static_cast<double>(lv[i])) -
           1.0 - lv[i];
  }
  const T inv = static_cast<T>(1.0 / m.rows());
  return tape.record(
      BasicTensor<T>::scalar(static_cast<T>(0.5 * acc / m.rows())),
      {mu, log_var},
      [mu, log_var, inv](BasicTape<T>& t, const BasicTensor<T>&, const BasicTensor<T>& g) {
        const T s = g[0] * inv;
        if (auto* gm = t.gradBuffer(mu)) gm->mat() += s * t.value(mu).mat();
        if (auto* gl = t.gradBuffer(log_var)) {
          const auto& lv = t.value(log_var);
          for (std::size_t i = 0; i < lv.size(); ++i) {
            (*gl)[i] += s * T(0.5) * (std::exp(lv[i]) - T(1));
          }
        }
      });
}

}  // namespace ccgvae

#endif  // CCGVAE_AUTODIFF_H_
