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

#ifndef CCGVAE_RUN_CONFIG_H_
#define CCGVAE_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ccgvae/adam.h"
#include "ccgvae/model.h"
#include "ccgvae/training.h"

namespace ccgvae {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keys (flat key=value text, '#' comments):
//   vocab, train_data, test_data, distribution
//   latent_dim, hidden_dim, steps (sets both), encoder_steps, decoder_steps,
//   mlp_hidden
//   lambda_latent, lambda_opt, epochs, batch_size, seed
//   lr, beta1, beta2, eps
//   encodings, recon_cap, samples, proxy_max_atoms
// Relative paths in a config file resolve against the file's directory.
struct RunConfig {
  std::string vocab;
  std::string train_data;
  std::string test_data;
  std::string distribution;
  ModelConfig model;
  LossWeights weights;
  int epochs = 10;
  int batch_size = 32;
  std::uint64_t seed = 0;
  AdamConfig adam;
  int encodings = 20;
  std::size_t recon_cap = 5000;
  std::size_t samples = 20000;
  int proxy_max_atoms = 9;
  // Keys that were set explicitly, by a file or an override.
  std::map<std::string, std::string> explicit_keys;

  // Sets one key; throws ConfigError on an unknown key or malformed value.
  void set(std::string_view key, std::string_view value);
  // Throws ConfigError on out-of-range values.
  void validate() const;
  bool isSet(const std::string& key) const {
    return explicit_keys.contains(key);
  }
};

// Applies `key=value` lines on top of `cfg`.
void applyConfigText(RunConfig& cfg, std::string_view text,
                     const std::string& base_dir = "");
// Reads a config file; throws ConfigError when it cannot be read.
RunConfig loadRunConfig(const std::string& path);

// Throws ModelMismatchError when explicitly configured dimensions or
// vocabulary contradict the checkpoint's model.
void checkCompatible(const RunConfig& cfg, const Model& model);

}  // namespace ccgvae

#endif  // CCGVAE_RUN_CONFIG_H_
