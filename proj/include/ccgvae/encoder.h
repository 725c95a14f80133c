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

#ifndef CCGVAE_ENCODER_H_
#define CCGVAE_ENCODER_H_

#include "ccgvae/autodiff.h"
#include "ccgvae/chem_graph.h"
#include "ccgvae/model.h"
#include "ccgvae/random.h"

namespace ccgvae {

// Per-atom posterior parameters, one row per heavy atom.
struct LatentEncoding {
  Var mu;       // m x latent
  Var log_var;  // m x latent, log sigma^2
};

// Type embeddings, S residual message-passing rounds, then linear mu and
// log sigma^2 heads. Throws std::invalid_argument for an empty graph or a
// graph over another vocabulary.
LatentEncoding encode(Tape& tape, const Model& model, const MolecularGraph& g);

// z = mu + exp(log_var / 2) * eps with eps ~ N(0, I).
Var reparameterize(Tape& tape, const LatentEncoding& enc, Rng& rng);

// m x latent standard normal draws.
Tensor samplePrior(int m, int latent_dim, Rng& rng);

}  // namespace ccgvae

#endif  // CCGVAE_ENCODER_H_
