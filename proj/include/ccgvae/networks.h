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

#ifndef CCGVAE_NETWORKS_H_
#define CCGVAE_NETWORKS_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ccgvae/autodiff.h"
#include "ccgvae/nn.h"
#include "ccgvae/random.h"

namespace ccgvae {

// Distance buckets of the edge features: hops 1..9, >= 10, unreachable.
inline constexpr int kDistanceBuckets = 11;
inline constexpr int kUnreachableBucket = 10;

inline int distanceBucket(int hops) {
  if (hops <= 0) return kUnreachableBucket;  // unreachable (-1) or the focus
  return hops >= 10 ? 9 : hops - 1;
}

struct NetworkDims {
  int vocab_size = 4;
  int nu = 4;  // histogram length (max valence)
  int latent = 100;
  int hidden = 100;
  int encoder_steps = 12;
  int decoder_steps = 12;
  int mlp_hidden = 250;

  int stateDim() const { return latent + hidden; }
  // [h_v, h_u, distance one-hot, H_init, H^t]
  int edgeFeatureDim() const { return 4 * stateDim() + kDistanceBuckets; }
};

// Edge features phi for a set of candidate rows around one focus atom. The
// focus state and the two global vectors are single rows shared by every
// candidate.
template <typename T>
struct BasicEdgeFeatures {
  BasicVar<T> focus;       // 1 x D
  BasicVar<T> candidates;  // n x D
  BasicVar<T> distance;    // n x kDistanceBuckets one-hot (constant)
  BasicVar<T> h_init;      // 1 x D
  BasicVar<T> h_t;         // 1 x D

  std::array<BasicVar<T>, 5> parts() const {
    return {focus, candidates, distance, h_init, h_t};
  }
};

// Every trainable network of the model. Encoder and decoder keep separate
// message-passing parameters.
template <typename T>
class BasicNetworks {
 public:
  BasicNetworks(BasicParameterStore<T>& store, const NetworkDims& dims,
                Rng& rng)
      : dims_(dims) {
    const int Z = dims.latent, H = dims.hidden, D = dims.stateDim();
    encoder_embedding_ = &store.add(
        "encoder.embedding", glorotUniform<T>(dims.vocab_size, H, rng));
    encoder_ggnn_ = BasicGGNN<T>(store, "encoder.ggnn", H, dims.encoder_steps,
                                 /*residual=*/true, rng);
    mu_head_ = BasicLinear<T>(store, "encoder.mu", H, Z, true, rng);
    log_var_head_ = BasicLinear<T>(store, "encoder.log_var", H, Z, true, rng);

    k_ = BasicLinear<T>(store, "typing.k", Z + 2 * dims.nu, H, true, rng);
    f_ = BasicLinear<T>(store, "typing.f", Z + H, dims.vocab_size, true, rng);

    decoder_embedding_ = &store.add(
        "decoder.embedding", glorotUniform<T>(dims.vocab_size, H, rng));
    decoder_ggnn_ = BasicGGNN<T>(store, "decoder.ggnn", D, dims.decoder_steps,
                                 /*residual=*/false, rng);
    stop_state_ = &store.add("decoder.stop_state", glorotUniform<T>(1, D, rng));
    c_ = BasicMLP<T>(store, "decoder.c", dims.edgeFeatureDim(),
                     dims.mlp_hidden, 1, rng);
    for (int l = 0; l < 3; ++l) {
      l_[l] = BasicMLP<T>(store, "decoder.l" + std::to_string(l + 1),
                          dims.edgeFeatureDim(), dims.mlp_hidden, 1, rng);
    }
    o_ = BasicMLP<T>(store, "property.o", Z, dims.mlp_hidden, 1, rng);
  }

  const NetworkDims& dims() const { return dims_; }

  // Encoder node states after message passing (m x hidden).
  BasicVar<T> encoderStates(BasicTape<T>& tape, std::span<const int> types,
                            const BasicAdjacency<T>& adj) const {
    const BasicVar<T> h0 = gatherRows(
        tape.parameter(*encoder_embedding_),
        std::vector<int>(types.begin(), types.end()));
    return encoder_ggnn_(h0, adj);
  }
  BasicVar<T> mu(BasicVar<T> states) const { return mu_head_(states); }
  BasicVar<T> logVar(BasicVar<T> states) const { return log_var_head_(states); }

  // R = [z, tanh(K [z, diff/m, used/m])] for every row, then F(R): type
  // logits (n x vocab).
  BasicVar<T> typingLogits(BasicVar<T> z, BasicVar<T> diff_norm,
                           BasicVar<T> used_norm) const {
    const BasicVar<T> e = tanh(k_(concatCols<T>({z, diff_norm, used_norm})));
    return f_(concatCols<T>({z, e}));
  }

  // h^0 = [z_v, embed(type_v)] (m x D).
  BasicVar<T> decoderInitialStates(BasicTape<T>& tape, BasicVar<T> z,
                                   std::span<const int> types) const {
    const BasicVar<T> emb = gatherRows(
        tape.parameter(*decoder_embedding_),
        std::vector<int>(types.begin(), types.end()));
    return concatCols<T>({z, emb});
  }
  BasicVar<T> decoderStates(BasicVar<T> h0,
                            const BasicAdjacency<T>& adj) const {
    return decoder_ggnn_(h0, adj);
  }
  BasicVar<T> stopState(BasicTape<T>& tape) const {
    return tape.parameter(*stop_state_);
  }

  // C(phi): existence logits (n x 1).
  BasicVar<T> existenceLogits(const BasicEdgeFeatures<T>& phi) const {
    const auto parts = phi.parts();
    return c_.applyToParts(parts);
  }
  // [L_1(phi), L_2(phi), L_3(phi)]: bond-type logits (n x 3).
  BasicVar<T> bondTypeLogits(const BasicEdgeFeatures<T>& phi) const {
    const auto parts = phi.parts();
    return concatCols<T>({l_[0].applyToParts(parts), l_[1].applyToParts(parts),
                          l_[2].applyToParts(parts)});
  }

  // O(mean of z rows), 1 x 1.
  BasicVar<T> property(BasicVar<T> z) const { return o_(meanRows(z)); }

  // Direct access for tests.
  const BasicLinear<T>& k() const { return k_; }
  const BasicLinear<T>& f() const { return f_; }
  const BasicMLP<T>& c() const { return c_; }
  const BasicMLP<T>& l(int i) const { return l_[i]; }
  const BasicMLP<T>& o() const { return o_; }
  const BasicGGNN<T>& encoderGGNN() const { return encoder_ggnn_; }
  const BasicGGNN<T>& decoderGGNN() const { return decoder_ggnn_; }
  const BasicLinear<T>& muHead() const { return mu_head_; }
  const BasicLinear<T>& logVarHead() const { return log_var_head_; }

 private:
  NetworkDims dims_;
  BasicParameter<T>* encoder_embedding_ = nullptr;
  BasicGGNN<T> encoder_ggnn_;
  BasicLinear<T> mu_head_;
  BasicLinear<T> log_var_head_;
  BasicLinear<T> k_;
  BasicLinear<T> f_;
  BasicParameter<T>* decoder_embedding_ = nullptr;
  BasicGGNN<T> decoder_ggnn_;
  BasicParameter<T>* stop_state_ = nullptr;
  BasicMLP<T> c_;
  std::array<BasicMLP<T>, 3> l_;
  BasicMLP<T> o_;
};

using Networks = BasicNetworks<float>;
using EdgeFeatures = BasicEdgeFeatures<float>;

}  // namespace ccgvae

#endif  // CCGVAE_NETWORKS_H_
