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

#include "ccgvae/adam.h"

#include <cmath>
#include <stdexcept>

namespace ccgvae {

void adamStep(Parameter& p, AdamMoments& moments, const AdamConfig& cfg,
              std::int64_t t) {
  if (t < 1) throw std::invalid_argument("Adam step counter must be >= 1");
  if (moments.m.size() == 0) {
    moments.m = Tensor(p.value.rows(), p.value.cols());
    moments.v = Tensor(p.value.rows(), p.value.cols());
  }
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double g = p.grad[i];
    const double m = cfg.beta1 * moments.m[i] + (1.0 - cfg.beta1) * g;
    const double v = cfg.beta2 * moments.v[i] + (1.0 - cfg.beta2) * g * g;
    moments.m[i] = static_cast<float>(m);
    moments.v[i] = static_cast<float>(v);
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    p.value[i] -= static_cast<float>(cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

void Adam::step(std::span<Parameter* const> params) {
  ++t_;
  for (Parameter* p : params) adamStep(*p, moments_[p], cfg_, t_);
}

}  // namespace ccgvae
