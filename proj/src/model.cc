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

#include "ccgvae/model.h"

#include <charconv>

namespace ccgvae {

namespace {

int metaInt(const Checkpoint& ckpt, const char* key) {
  const std::string* v = ckpt.meta(key);
  if (v == nullptr) {
    throw ModelMismatchError(std::string("checkpoint lacks '") + key + "'");
  }
  int out = 0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ModelMismatchError(std::string("bad checkpoint value for ") + key);
  }
  return out;
}

}  // namespace

NetworkDims networkDims(const AtomVocabulary& vocab, const ModelConfig& cfg) {
  if (cfg.latent_dim < 1 || cfg.hidden_dim < 1 || cfg.encoder_steps < 0 ||
      cfg.decoder_steps < 0 || cfg.mlp_hidden < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  NetworkDims d;
  d.vocab_size = static_cast<int>(vocab.size());
  d.nu = vocab.maxValence();
  d.latent = cfg.latent_dim;
  d.hidden = cfg.hidden_dim;
  d.encoder_steps = cfg.encoder_steps;
  d.decoder_steps = cfg.decoder_steps;
  d.mlp_hidden = cfg.mlp_hidden;
  return d;
}

Model::Model(std::shared_ptr<const AtomVocabulary> vocab,
             const ModelConfig& cfg, std::uint64_t seed)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  if (!vocab_) throw std::invalid_argument("model needs a vocabulary");
  Rng rng(seed);
  nets_ = std::make_unique<Networks>(store_, networkDims(*vocab_, cfg_), rng);
}

Checkpoint Model::toCheckpoint() const {
  Checkpoint ckpt;
  ckpt.setMeta("vocabulary", vocab_->serialize());
  ckpt.setMeta("vocabulary_fingerprint", std::to_string(vocab_->fingerprint()));
  ckpt.setMeta("latent_dim", std::to_string(cfg_.latent_dim));
  ckpt.setMeta("hidden_dim", std::to_string(cfg_.hidden_dim));
  ckpt.setMeta("encoder_steps", std::to_string(cfg_.encoder_steps));
  ckpt.setMeta("decoder_steps", std::to_string(cfg_.decoder_steps));
  ckpt.setMeta("mlp_hidden", std::to_string(cfg_.mlp_hidden));
  for (const auto* p : store_.all()) ckpt.tensors.push_back({p->name, p->value});
  return ckpt;
}

std::unique_ptr<Model> Model::fromCheckpoint(const Checkpoint& ckpt) {
  const std::string* v = ckpt.meta("vocabulary");
  if (v == nullptr) throw ModelMismatchError("checkpoint lacks 'vocabulary'");
  auto vocab = std::make_shared<const AtomVocabulary>(
      AtomVocabulary::deserialize(*v));
  ModelConfig cfg;
  cfg.latent_dim = metaInt(ckpt, "latent_dim");
  cfg.hidden_dim = metaInt(ckpt, "hidden_dim");
  cfg.encoder_steps = metaInt(ckpt, "encoder_steps");
  cfg.decoder_steps = metaInt(ckpt, "decoder_steps");
  cfg.mlp_hidden = metaInt(ckpt, "mlp_hidden");
  auto model = std::make_unique<Model>(std::move(vocab), cfg, 0);
  model->loadParameters(ckpt);
  return model;
}

void Model::loadParameters(const Checkpoint& ckpt) {
  const std::string* v = ckpt.meta("vocabulary");
  if (v == nullptr) throw ModelMismatchError("checkpoint lacks 'vocabulary'");
  if (AtomVocabulary::deserialize(*v) != *vocab_) {
    throw ModelMismatchError("checkpoint vocabulary " + *v +
                             " differs from model vocabulary " +
                             vocab_->serialize());
  }
  const std::pair<const char*, int> dims[] = {
      {"latent_dim", cfg_.latent_dim},       {"hidden_dim", cfg_.hidden_dim},
      {"encoder_steps", cfg_.encoder_steps}, {"decoder_steps", cfg_.decoder_steps},
      {"mlp_hidden", cfg_.mlp_hidden}};
  for (const auto& [key, expected] : dims) {
    const int got = metaInt(ckpt, key);
    if (got != expected) {
      throw ModelMismatchError(std::string("checkpoint ") + key + "=" +
                               std::to_string(got) + ", model expects " +
                               std::to_string(expected));
    }
  }
  for (auto* p : store_.all()) {
    const Tensor* t = ckpt.tensor(p->name);
    if (t == nullptr) {
      throw ModelMismatchError("checkpoint lacks tensor " + p->name);
    }
    if (!t->sameShape(p->value)) {
      throw ModelMismatchError("tensor " + p->name + " has shape " +
                               t->shapeString() + ", expected " +
                               p->value.shapeString());
    }
    p->value = *t;
  }
}

Adjacency adjacencyOf(const MolecularGraph& g) {
  const int m = g.atomCount();
  Adjacency adj;
  for (auto& a : adj) a = Tensor(m, m);
  for (const Bond& b : g.bonds()) {
    const int l = bondTypeIndex(b.order);
    adj[l](b.u, b.v) = 1.0f;
    adj[l](b.v, b.u) = 1.0f;
  }
  return adj;
}

}  // namespace ccgvae
