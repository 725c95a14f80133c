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

#ifndef CCGVAE_TRAINING_H_
#define CCGVAE_TRAINING_H_

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ccgvae/adam.h"
#include "ccgvae/autodiff.h"
#include "ccgvae/chem_graph.h"
#include "ccgvae/decoder.h"
#include "ccgvae/model.h"
#include "ccgvae/random.h"

namespace ccgvae {

// Random start atom, then breadth-first: each focus emits its bonds to atoms
// it is not yet bonded to in shuffled order, followed by STOP. Throws
// std::invalid_argument for an empty or disconnected graph. `start` >= 0
// fixes the start atom.
TeacherTrajectory buildTrajectory(const MolecularGraph& g, Rng& rng,
                                  int start = -1);

struct LossWeights {
  double lambda_latent = 0.3;
  double lambda_opt = 10.0;
};

struct LossBreakdown {
  Var total;  // differentiable total
  double recon = 0.0;
  double latent = 0.0;
  double opt = 0.0;
  double lambda_latent = 0.0;
  double lambda_opt = 0.0;
  double totalValue() const {
    return recon + lambda_latent * latent + lambda_opt * opt;
  }
};

// encode -> reparameterize -> teacher-forced typing -> teacher-forced bonds.
// recon sums every cross-entropy, latent is the per-atom mean KL to N(0, I),
// opt is (O(mean z) - property)^2. The opt term is skipped when
// lambda_opt == 0; otherwise a missing property throws
// std::invalid_argument.
LossBreakdown computeLoss(Tape& tape, const Model& model,
                          const MolecularGraph& g,
                          const TeacherTrajectory& trajectory,
                          std::optional<double> property,
                          const LossWeights& weights, Rng& rng);

// Heavy-atom count scaled to [0, 1]: min(1, atoms / max_atoms).
double proxyProperty(const MolecularGraph& g, int max_atoms);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  AdamConfig adam;
  LossWeights weights;
  // Written after every epoch (and once before the first when epochs == 0)
  // when non-empty.
  std::string checkpoint_path;
  std::vector<std::pair<std::string, std::string>> checkpoint_metadata;
};

struct EpochStats {
  int epoch = 0;
  double recon = 0.0;
  double latent = 0.0;
  double opt = 0.0;
  double total = 0.0;
};

std::string formatEpoch(const EpochStats& s);

// Shuffled minibatches, one fresh trajectory per molecule and epoch, Adam on
// the batch-mean loss. Reports per-epoch means of the training losses to
// `log` as `epoch=<n> recon=<f> latent=<f> opt=<f> total=<f>`.
std::vector<EpochStats> trainLoop(
    Model& model, const std::vector<MolecularGraph>& graphs,
    const std::vector<std::optional<double>>& properties,
    const TrainConfig& cfg, Rng& rng, std::ostream* log = nullptr);

// Mean loss over a set without updating parameters.
EpochStats evaluateLoss(const Model& model,
                        const std::vector<MolecularGraph>& graphs,
                        const std::vector<std::optional<double>>& properties,
                        const LossWeights& weights, Rng& rng);

// Teacher-forced atom-type accuracy of the argmax of F under the mask.
double typingAccuracy(const Model& model,
                      const std::vector<MolecularGraph>& graphs, Rng& rng);

enum class Direction { kAscend, kDescend };

double predictProperty(const Model& model, const Tensor& z);

struct LatentTrace {
  Tensor z;
  std::vector<double> predictions;  // the start, then one per step
  int rejected_steps = 0;
};

// z <- z +/- step_size * grad_z O(mean z). A step that would move the
// prediction the wrong way is retried at half the size up to 20 times and
// otherwise skipped, so predictions are monotone.
LatentTrace optimizeLatent(const Model& model, const Tensor& z,
                           Direction direction, int steps, double step_size);

}  // namespace ccgvae

#endif  // CCGVAE_TRAINING_H_
