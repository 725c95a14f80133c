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

#ifndef CCGVAE_MODEL_H_
#define CCGVAE_MODEL_H_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "ccgvae/checkpoint.h"
#include "ccgvae/chem_graph.h"
#include "ccgvae/networks.h"
#include "ccgvae/nn.h"

namespace ccgvae {

struct ModelConfig {
  int latent_dim = 100;
  int hidden_dim = 100;
  int encoder_steps = 12;
  int decoder_steps = 12;
  int mlp_hidden = 250;
};

// Raised when a checkpoint does not fit the requested vocabulary or model.
class ModelMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vocabulary, dimensions and every trainable parameter.
class Model {
 public:
  Model(std::shared_ptr<const AtomVocabulary> vocab, const ModelConfig& cfg,
        std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const AtomVocabulary& vocabulary() const { return *vocab_; }
  const std::shared_ptr<const AtomVocabulary>& sharedVocabulary() const {
    return vocab_;
  }
  int nu() const { return vocab_->maxValence(); }
  int stateDim() const { return cfg_.latent_dim + cfg_.hidden_dim; }

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const Networks& nets() const { return *nets_; }

  // Parameters plus the model metadata (vocabulary, fingerprint, dims).
  Checkpoint toCheckpoint() const;
  // Rebuilds the model recorded in a checkpoint.
  static std::unique_ptr<Model> fromCheckpoint(const Checkpoint& ckpt);
  // Copies parameter values; throws ModelMismatchError when the checkpoint
  // was written for a different vocabulary or dimensions.
  void loadParameters(const Checkpoint& ckpt);

 private:
  std::shared_ptr<const AtomVocabulary> vocab_;
  ModelConfig cfg_;
  ParameterStore store_;
  std::unique_ptr<Networks> nets_;
};

NetworkDims networkDims(const AtomVocabulary& vocab, const ModelConfig& cfg);

// Per-bond-type 0/1 adjacency matrices.
Adjacency adjacencyOf(const MolecularGraph& g);

}  // namespace ccgvae

#endif  // CCGVAE_MODEL_H_
