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

#ifndef CCGVAE_NN_H_
#define CCGVAE_NN_H_

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccgvae/autodiff.h"
#include "ccgvae/random.h"

namespace ccgvae {

// Owns parameters with stable addresses, in creation order.
template <typename T>
class BasicParameterStore {
 public:
  BasicParameter<T>& add(const std::string& name, BasicTensor<T> init) {
    if (find(name) != nullptr) {
      throw std::invalid_argument("duplicate parameter name " + name);
    }
    params_.push_back(std::make_unique<BasicParameter<T>>(name, std::move(init)));
    return *params_.back();
  }

  BasicParameter<T>* find(const std::string& name) const {
    for (const auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  std::vector<BasicParameter<T>*> all() const {
    std::vector<BasicParameter<T>*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.get());
    return out;
  }

  std::size_t size() const { return params_.size(); }
  std::size_t scalarCount() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

  void zeroGrad() {
    for (auto& p : params_) p->zeroGrad();
  }

 private:
  std::vector<std::unique_ptr<BasicParameter<T>>> params_;
};

using ParameterStore = BasicParameterStore<float>;

// Glorot/Xavier uniform initialization.
template <typename T>
BasicTensor<T> glorotUniform(int rows, int cols, Rng& rng) {
  BasicTensor<T> t(rows, cols);
  const double limit = std::sqrt(6.0 / (rows + cols));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>((2.0 * uniformUnit(rng) - 1.0) * limit);
  }
  return t;
}

// y = x W + b with W stored in x out.
template <typename T>
class BasicLinear {
 public:
  BasicLinear() = default;
  BasicLinear(BasicParameterStore<T>& store, const std::string& name, int in,
              int out, bool bias, Rng& rng)
      : in_(in), out_(out) {
    weight_ = &store.add(name + ".weight", glorotUniform<T>(in, out, rng));
    if (bias) bias_ = &store.add(name + ".bias", BasicTensor<T>(1, out));
  }

  int inputDim() const { return in_; }
  int outputDim() const { return out_; }
  BasicParameter<T>& weight() const { return *weight_; }
  BasicParameter<T>* bias() const { return bias_; }

  BasicVar<T> operator()(BasicVar<T> x) const {
    auto& tape = *x.tape();
    BasicVar<T> y = matmul(x, tape.parameter(*weight_));
    if (bias_ != nullptr) y = add(y, tape.parameter(*bias_));
    return y;
  }

  // Same map applied to the column-wise concatenation of `parts` without
  // materializing it: each part multiplies its own block of W. Parts are
  // either n x d_i or single rows, which broadcast over the n rows.
  BasicVar<T> applyToParts(std::span<const BasicVar<T>> parts) const {
    if (parts.empty()) throw ShapeError("applyToParts of nothing");
    auto& tape = *parts[0].tape();
    const BasicVar<T> w = tape.parameter(*weight_);
    int off = 0;
    int rows = 1;
    for (const auto& p : parts) rows = std::max(rows, p.rows());
    BasicVar<T> full;  // accumulates n-row contributions
    BasicVar<T> shared;  // accumulates single-row contributions
    for (const auto& p : parts) {
      if (p.rows() != 1 && p.rows() != rows) {
        throw ShapeError("applyToParts: inconsistent row counts");
      }
      const BasicVar<T> y = matmul(p, sliceRows(w, off, p.cols()));
      off += p.cols();
      BasicVar<T>& acc = (p.rows() == rows && rows != 1) ? full : shared;
      acc = acc.valid() ? add(acc, y) : y;
    }
    if (off != in_) {
      throw ShapeError("applyToParts: parts cover " + std::to_string(off) +
                       " inputs, layer expects " + std::to_string(in_));
    }
    if (bias_ != nullptr) {
      const BasicVar<T> b = tape.parameter(*bias_);
      shared = shared.valid() ? add(shared, b) : b;
    }
    if (!full.valid()) return shared;
    return shared.valid() ? add(full, shared) : full;
  }

 private:
  int in_ = 0;
  int out_ = 0;
  BasicParameter<T>* weight_ = nullptr;
  BasicParameter<T>* bias_ = nullptr;
};

// Gated recurrent unit:
//   z = sigmoid(x Wz + h Uz + bz), r = sigmoid(x Wr + h Ur + br)
//   n = tanh(x Wn + (r * h) Un + bn), h' = (1 - z) * n + z * h
template <typename T>
class BasicGRUCell {
 public:
  BasicGRUCell() = default;
  BasicGRUCell(BasicParameterStore<T>& store, const std::string& name,
               int input_dim, int state_dim, Rng& rng)
      : state_dim_(state_dim) {
    const char* gates[3] = {"z", "r", "n"};
    for (int g = 0; g < 3; ++g) {
      w_[g] = BasicLinear<T>(store, name + ".w" + gates[g], input_dim,
                             state_dim, /*bias=*/true, rng);
      u_[g] = BasicLinear<T>(store, name + ".u" + gates[g], state_dim,
                             state_dim, /*bias=*/false, rng);
    }
  }

  int stateDim() const { return state_dim_; }

  BasicVar<T> operator()(BasicVar<T> h, BasicVar<T> x) const {
    if (h.cols() != state_dim_ || h.rows() != x.rows()) {
      throw ShapeError("GRU: state " + h.value().shapeString() + ", input " +
                       x.value().shapeString());
    }
    const BasicVar<T> z = sigmoid(add(w_[0](x), u_[0](h)));
    const BasicVar<T> r = sigmoid(add(w_[1](x), u_[1](h)));
    const BasicVar<T> n = tanh(add(w_[2](x), u_[2](mul(r, h))));
    // (1 - z) * n + z * h == n + z * (h - n)
    return add(n, mul(z, sub(h, n)));
  }

 private:
  int state_dim_ = 0;
  std::array<BasicLinear<T>, 3> w_;
  std::array<BasicLinear<T>, 3> u_;
};

// One hidden ReLU layer.
template <typename T>
class BasicMLP {
 public:
  BasicMLP() = default;
  BasicMLP(BasicParameterStore<T>& store, const std::string& name, int in,
           int hidden, int out, Rng& rng)
      : hidden_(store, name + ".hidden", in, hidden, true, rng),
        output_(store, name + ".out", hidden, out, true, rng) {}

  BasicVar<T> operator()(BasicVar<T> x) const {
    return output_(relu(hidden_(x)));
  }
  BasicVar<T> applyToParts(std::span<const BasicVar<T>> parts) const {
    return output_(relu(hidden_.applyToParts(parts)));
  }

  const BasicLinear<T>& hiddenLayer() const { return hidden_; }
  const BasicLinear<T>& outputLayer() const { return output_; }

 private:
  BasicLinear<T> hidden_;
  BasicLinear<T> output_;
};

// Per-bond-type adjacency matrices (m x m, symmetric 0/1) of a graph.
template <typename T>
using BasicAdjacency = std::array<BasicTensor<T>, 3>;

// Gated graph recurrent network: each round sums bias-free per-bond-type
// transforms E_l of neighbor states and feeds them to a GRU. With
// `residual`, the initial states are added to every round's GRU output;
// adding the round input instead would double the state norm per round.
template <typename T>
class BasicGGNN {
 public:
  BasicGGNN() = default;
  BasicGGNN(BasicParameterStore<T>& store, const std::string& name, int dim,
            int steps, bool residual, Rng& rng)
      : steps_(steps), residual_(residual),
        gru_(store, name + ".gru", dim, dim, rng) {
    for (int l = 0; l < 3; ++l) {
      edge_[l] = BasicLinear<T>(store, name + ".edge" + std::to_string(l + 1),
                                dim, dim, /*bias=*/false, rng);
    }
  }

  int steps() const { return steps_; }
  const BasicLinear<T>& edgeTransform(int l) const { return edge_[l]; }
  const BasicGRUCell<T>& gru() const { return gru_; }

  // Message sum_l A_l (h E_l) for every node.
  BasicVar<T> messages(BasicVar<T> h, const BasicAdjacency<T>& adj) const {
    auto& tape = *h.tape();
    BasicVar<T> msg;
    for (int l = 0; l < 3; ++l) {
      if (isZero(adj[l])) continue;
      const BasicVar<T> part = matmul(tape.constant(adj[l]), edge_[l](h));
      msg = msg.valid() ? add(msg, part) : part;
    }
    if (!msg.valid()) msg = tape.constant(BasicTensor<T>(h.rows(), h.cols()));
    return msg;
  }

  BasicVar<T> operator()(BasicVar<T> h, const BasicAdjacency<T>& adj) const {
    const BasicVar<T> h0 = h;
    for (int s = 0; s < steps_; ++s) {
      const BasicVar<T> next = gru_(h, messages(h, adj));
      h = residual_ ? add(next, h0) : next;
    }
    return h;
  }

 private:
  static bool isZero(const BasicTensor<T>& a) {
    for (const T v : a.values()) {
      if (v != T(0)) return false;
    }
    return true;
  }

  int steps_ = 0;
  bool residual_ = false;
  std::array<BasicLinear<T>, 3> edge_;
  BasicGRUCell<T> gru_;
};

using Linear = BasicLinear<float>;
using GRUCell = BasicGRUCell<float>;
using MLP = BasicMLP<float>;
using GGNN = BasicGGNN<float>;
using Adjacency = BasicAdjacency<float>;

}  // namespace ccgvae

#endif  // CCGVAE_NN_H_
