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

#ifndef CCGVAE_ADAM_H_
#define CCGVAE_ADAM_H_

#include <cstdint>
#include <span>
#include <unordered_map>

#include "ccgvae/autodiff.h"

namespace ccgvae {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamMoments {
  Tensor m;
  Tensor v;
};

// One bias-corrected Adam update of `p` from p.grad at step t >= 1.
void adamStep(Parameter& p, AdamMoments& moments, const AdamConfig& cfg,
              std::int64_t t);

// Keeps per-parameter moments and the step counter.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(std::span<Parameter* const> params);
  std::int64_t stepCount() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::unordered_map<const Parameter*, AdamMoments> moments_;
};

}  // namespace ccgvae

#endif  // CCGVAE_ADAM_H_
