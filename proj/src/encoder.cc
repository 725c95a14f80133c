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

#include "ccgvae/encoder.h"

#include <stdexcept>
#include <vector>

namespace ccgvae {

LatentEncoding encode(Tape& tape, const Model& model, const MolecularGraph& g) {
  if (g.empty()) throw std::invalid_argument("cannot encode an empty graph");
  if (g.vocabulary() != model.vocabulary()) {
    throw std::invalid_argument("graph vocabulary " +
                                g.vocabulary().serialize() +
                                " differs from model vocabulary " +
                                model.vocabulary().serialize());
  }
  std::vector<int> types;
  types.reserve(g.atomCount());
  for (const Atom& a : g.atoms()) types.push_back(a.type);
  const Var states = model.nets().encoderStates(tape, types, adjacencyOf(g));
  return {model.nets().mu(states), model.nets().logVar(states)};
}

Var reparameterize(Tape& tape, const LatentEncoding& enc, Rng& rng) {
  const Tensor& mu = enc.mu.value();
  Tensor eps(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    eps[i] = static_cast<float>(standardNormal(rng));
  }
  const Var sigma = exp(scale(enc.log_var, 0.5f));
  return add(enc.mu, mul(sigma, tape.constant(std::move(eps))));
}

Tensor samplePrior(int m, int latent_dim, Rng& rng) {
  if (m < 1) throw std::invalid_argument("samplePrior needs m >= 1");
  Tensor z(m, latent_dim);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = static_cast<float>(standardNormal(rng));
  }
  return z;
}

}  // namespace ccgvae
