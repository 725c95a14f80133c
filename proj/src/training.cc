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

#include "ccgvae/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "ccgvae/checkpoint.h"
#include "ccgvae/encoder.h"
#include "ccgvae/valence_histogram.h"

namespace ccgvae {

TeacherTrajectory buildTrajectory(const MolecularGraph& g, Rng& rng,
                                  int start) {
  const int m = g.atomCount();
  if (m == 0) throw std::invalid_argument("trajectory of an empty graph");
  if (!isConnected(g)) {
    throw std::invalid_argument("trajectory of a disconnected graph");
  }
  if (start >= m) throw std::invalid_argument("start atom out of range");
  TeacherTrajectory t;
  t.start = start >= 0 ? start : static_cast<int>(uniformIndex(rng, m));
  std::vector<char> reached(m, 0);
  // emitted[v] marks atoms whose bonds to every neighbour are already out.
  std::vector<char> emitted(m, 0);
  std::deque<int> fifo{t.start};
  reached[t.start] = 1;
  while (!fifo.empty()) {
    const int focus = fifo.front();
    fifo.pop_front();
    t.visit_order.push_back(focus);
    std::vector<int> pending;
    for (const auto& nb : g.neighbors(focus)) {
      if (!emitted[nb.atom]) pending.push_back(nb.atom);
    }
    std::shuffle(pending.begin(), pending.end(), rng);
    for (const int u : pending) {
      t.decisions.push_back({focus, u, *g.bondBetween(focus, u)});
      if (!reached[u]) {
        reached[u] = 1;
        fifo.push_back(u);
      }
    }
    t.decisions.push_back({focus, kStop, BondOrder::kSingle});
    emitted[focus] = 1;
  }
  return t;
}

double proxyProperty(const MolecularGraph& g, int max_atoms) {
  if (max_atoms < 1) throw std::invalid_argument("max_atoms must be >= 1");
  return std::min(1.0, static_cast<double>(g.atomCount()) / max_atoms);
}

LossBreakdown computeLoss(Tape& tape, const Model& model,
                          const MolecularGraph& g,
                          const TeacherTrajectory& trajectory,
                          std::optional<double> property,
                          const LossWeights& weights, Rng& rng) {
  if (weights.lambda_opt > 0.0 && !property.has_value()) {
    throw std::invalid_argument("property value required when lambda_opt > 0");
  }
  const LatentEncoding enc = encode(tape, model, g);
  const Var z = reparameterize(tape, enc, rng);

  std::vector<int> types(g.atomCount());
  for (int v = 0; v < g.atomCount(); ++v) types[v] = g.atom(v).type;
  const TypingResult typing =
      assignAtomTypes(tape, model, z, histogramOfValences(g, false), nullptr,
                      DecodeMode::kTraining, types, rng);
  DecoderState state = initializeDecoderState(tape, model, z, types, rng);
  const BondDecodeResult bonds = decodeBonds(
      tape, model, state, DecodeMode::kTraining, &trajectory, rng);

  LossBreakdown out;
  out.lambda_latent = weights.lambda_latent;
  out.lambda_opt = weights.lambda_opt;
  const Var recon = add(typing.loss, bonds.loss);
  const Var latent = gaussianKL(enc.mu, enc.log_var);
  out.recon = recon.value().item();
  out.latent = latent.value().item();
  out.total = add(recon, scale(latent, static_cast<float>(weights.lambda_latent)));
  if (weights.lambda_opt > 0.0) {
    const Var err = rsubScalar(static_cast<float>(*property),
                               model.nets().property(z));
    const Var opt = mul(err, err);
    out.opt = opt.value().item();
    out.total = add(out.total, scale(opt, static_cast<float>(weights.lambda_opt)));
  }
  return out;
}

std::string formatEpoch(const EpochStats& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "epoch=%d recon=%.6f latent=%.6f opt=%.6f total=%.6f", s.epoch,
                s.recon, s.latent, s.opt, s.total);
  return buf;
}

namespace {

void checkInputs(const std::vector<MolecularGraph>& graphs,
                 const std::vector<std::optional<double>>& properties) {
  if (graphs.empty()) throw std::invalid_argument("empty training set");
  if (properties.size() != graphs.size()) {
    throw std::invalid_argument("one property slot per molecule required");
  }
}

void accumulate(EpochStats& s, const LossBreakdown& l) {
  s.recon += l.recon;
  s.latent += l.latent;
  s.opt += l.opt;
  s.total += l.totalValue();
}

void finish(EpochStats& s, std::size_t n) {
  s.recon /= n;
  s.latent /= n;
  s.opt /= n;
  s.total /= n;
}

void saveCheckpoint(const Model& model, const TrainConfig& cfg, int epoch) {
  if (cfg.checkpoint_path.empty()) return;
  Checkpoint ckpt = model.toCheckpoint();
  for (const auto& [k, v] : cfg.checkpoint_metadata) ckpt.setMeta(k, v);
  ckpt.setMeta("epoch", std::to_string(epoch));
  ckpt.setMeta("lambda_latent", std::to_string(cfg.weights.lambda_latent));
  ckpt.setMeta("lambda_opt", std::to_string(cfg.weights.lambda_opt));
  writeCheckpoint(cfg.checkpoint_path, ckpt);
}

}  // namespace

std::vector<EpochStats> trainLoop(
    Model& model, const std::vector<MolecularGraph>& graphs,
    const std::vector<std::optional<double>>& properties,
    const TrainConfig& cfg, Rng& rng, std::ostream* log) {
  checkInputs(graphs, properties);
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  Adam adam(cfg.adam);
  const std::vector<Parameter*> params = model.parameters().all();
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EpochStats> history;
  if (cfg.epochs == 0) saveCheckpoint(model, cfg, 0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), b + cfg.batch_size);
      const float inv = 1.0f / static_cast<float>(end - b);
      model.parameters().zeroGrad();
      // Molecules of a batch run on separate tapes; gradients of the batch
      // mean accumulate in the parameters.
      for (std::size_t i = b; i < end; ++i) {
        const MolecularGraph& g = graphs[order[i]];
        const TeacherTrajectory traj = buildTrajectory(g, rng);
        Tape tape;
        const LossBreakdown loss = computeLoss(
            tape, model, g, traj, properties[order[i]], cfg.weights, rng);
        accumulate(stats, loss);
        tape.backward(scale(loss.total, inv));
      }
      adam.step(params);
    }
    finish(stats, graphs.size());
    history.push_back(stats);
    if (log) *log << formatEpoch(stats) << "\n" << std::flush;
    saveCheckpoint(model, cfg, epoch);
  }
  return history;
}

EpochStats evaluateLoss(const Model& model,
                        const std::vector<MolecularGraph>& graphs,
                        const std::vector<std::optional<double>>& properties,
                        const LossWeights& weights, Rng& rng) {
  checkInputs(graphs, properties);
  EpochStats stats;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const TeacherTrajectory traj = buildTrajectory(graphs[i], rng);
    Tape tape(/*grad_enabled=*/false);
    accumulate(stats, computeLoss(tape, model, graphs[i], traj, properties[i],
                                  weights, rng));
  }
  finish(stats, graphs.size());
  return stats;
}

double typingAccuracy(const Model& model,
                      const std::vector<MolecularGraph>& graphs, Rng& rng) {
  std::size_t hits = 0, total = 0;
  for (const auto& g : graphs) {
    Tape tape(/*grad_enabled=*/false);
    const Var z = reparameterize(tape, encode(tape, model, g), rng);
    std::vector<int> types(g.atomCount());
    for (int v = 0; v < g.atomCount(); ++v) types[v] = g.atom(v).type;
    const TypingResult r =
        assignAtomTypes(tape, model, z, histogramOfValences(g, false), nullptr,
                        DecodeMode::kTraining, types, rng);
    for (int t = 0; t < g.atomCount(); ++t) {
      int best = 0;
      r.probabilities.mat().row(t).maxCoeff(&best);
      hits += best == types[t];
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / total;
}

double predictProperty(const Model& model, const Tensor& z) {
  Tape tape(/*grad_enabled=*/false);
  return model.nets().property(tape.constant(z)).value().item();
}

LatentTrace optimizeLatent(const Model& model, const Tensor& z,
                           Direction direction, int steps, double step_size) {
  if (z.cols() != model.config().latent_dim || z.rows() < 1) {
    throw ShapeError("latent points must be m x " +
                     std::to_string(model.config().latent_dim));
  }
  const double sign = direction == Direction::kAscend ? 1.0 : -1.0;
  LatentTrace trace;
  trace.z = z;
  double current = predictProperty(model, z);
  trace.predictions.push_back(current);
  for (int s = 0; s < steps; ++s) {
    Tensor grad;
    {
      Tape tape;
      const Var zv = tape.variable(trace.z);
      tape.backward(model.nets().property(zv));
      grad = tape.grad(zv);
    }
    bool accepted = false;
    double size = step_size;
    for (int attempt = 0; attempt <= 20 && size > 0.0; ++attempt) {
      Tensor next = trace.z;
      next.mat() += static_cast<float>(sign * size) * grad.mat();
      const double value = predictProperty(model, next);
      if (sign * (value - current) >= 0.0) {
        trace.z = std::move(next);
        current = value;
        accepted = true;
        break;
      }
      size *= 0.5;
    }
    trace.rejected_steps += !accepted;
    trace.predictions.push_back(current);
  }
  return trace;
}

}  // namespace ccgvae
