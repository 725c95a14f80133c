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
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "ccgvae/canonical.h"
#include "ccgvae/checkpoint.h"
#include "ccgvae/encoder.h"
#include "replay.h"
#include "test_util.h"

namespace ccgvae {
namespace {

using testing::mol;
using testing::qm9Vocab;
using testing::tinyConfig;

using testing::identical;
using testing::replay;
using testing::typesOf;

std::vector<std::optional<double>> proxies(
    const std::vector<MolecularGraph>& graphs) {
  std::vector<std::optional<double>> p;
  for (const auto& g : graphs) p.push_back(proxyProperty(g, 9));
  return p;
}

std::vector<MolecularGraph> corpusHead(std::size_t n) {
  const auto& all = testing::toyCorpus().graphs;
  return {all.begin(), all.begin() + n};
}

// ---------------------------------------------------------------------------
// Trajectories

TEST(Trajectory, SingleAtom) {
  Rng rng(1);
  const TeacherTrajectory t = buildTrajectory(mol("C"), rng);
  EXPECT_EQ(t.start, 0);
  EXPECT_EQ(t.visit_order, std::vector<int>{0});
  ASSERT_EQ(t.decisions.size(), 1u);
  EXPECT_EQ(t.decisions[0].target, kStop);
}

TEST(Trajectory, PathFromCentreBondsBothEndsThenStops) {
  Rng rng(2);
  bool saw_a_first = false, saw_c_first = false;
  for (int i = 0; i < 50; ++i) {
    const TeacherTrajectory t = buildTrajectory(mol("CNO"), rng, 1);
    ASSERT_EQ(t.decisions.size(), 5u);
    const auto& d = t.decisions;
    EXPECT_EQ(d[0].focus, 1);
    EXPECT_EQ(d[1].focus, 1);
    EXPECT_EQ(d[2].focus, 1);
    EXPECT_EQ(d[2].target, kStop);
    EXPECT_EQ(std::min(d[0].target, d[1].target), 0);
    EXPECT_EQ(std::max(d[0].target, d[1].target), 2);
    saw_a_first = saw_a_first || d[0].target == 0;
    saw_c_first = saw_c_first || d[0].target == 2;
    EXPECT_EQ(d[3].target, kStop);
    EXPECT_EQ(d[4].target, kStop);
  }
  EXPECT_TRUE(saw_a_first && saw_c_first);
}

TEST(Trajectory, RejectsDisconnectedAndEmptyGraphs) {
  Rng rng(3);
  EXPECT_THROW(buildTrajectory(mol("C.C"), rng), std::invalid_argument);
  EXPECT_THROW(buildTrajectory(MolecularGraph(qm9Vocab()), rng),
               std::invalid_argument);
}

TEST(Trajectory, VisitsEveryAtomOnce) {
  Rng rng(4);
  for (const auto& g : testing::toyCorpus().graphs) {
    const TeacherTrajectory t = buildTrajectory(g, rng);
    std::vector<int> order = t.visit_order;
    std::sort(order.begin(), order.end());
    ASSERT_EQ(static_cast<int>(order.size()), g.atomCount());
    for (int i = 0; i < g.atomCount(); ++i) ASSERT_EQ(order[i], i);
    const auto bonds = std::count_if(t.decisions.begin(), t.decisions.end(),
                                     [](const auto& d) { return d.target != kStop; });
    EXPECT_EQ(bonds, g.bondCount());
  }
}

TEST(Trajectory, ReplayReproducesEveryCorpusMolecule) {
  Model model(qm9Vocab(), tinyConfig(), 31);
  Rng rng(5);
  for (const auto& g : testing::toyCorpus().graphs) {
    const TeacherTrajectory t = buildTrajectory(g, rng);
    const MolecularGraph out = replay(model, g, t, rng);
    ASSERT_TRUE(identical(out, g)) << writeSmiles(g);
  }
}

// ---------------------------------------------------------------------------
// Loss

TEST(Loss, WeightsEnterLinearly) {
  Model model(qm9Vocab(), tinyConfig(), 41);
  const MolecularGraph g = mol("OCC(=O)C#N");
  Rng traj_rng(6);
  const TeacherTrajectory t = buildTrajectory(g, traj_rng);
  Tape tape(false);
  auto run = [&](double l1, double l2) {
    Rng rng(7);
    return computeLoss(tape, model, g, t, 0.5, {l1, l2}, rng);
  };
  const LossBreakdown base = run(0.0, 0.0);
  EXPECT_NEAR(base.total.value().item(), base.recon, 1e-4 * base.recon);
  for (const auto& [l1, l2] : {std::pair{0.3, 10.0}, {1.0, 0.5}, {2.5, 3.0}}) {
    const LossBreakdown l = run(l1, l2);
    EXPECT_DOUBLE_EQ(l.recon, base.recon);
    EXPECT_DOUBLE_EQ(l.latent, base.latent);
    EXPECT_NEAR(l.total.value().item(), base.recon + l1 * l.latent + l2 * l.opt,
                1e-4 * (1.0 + std::abs(l.totalValue())));
    EXPECT_DOUBLE_EQ(l.totalValue(), base.recon + l1 * l.latent + l2 * l.opt);
  }
}

TEST(Loss, MissingPropertyOnlyMattersWithOptWeight) {
  Model model(qm9Vocab(), tinyConfig(), 42);
  const MolecularGraph g = mol("CCO");
  Rng rng(8);
  const TeacherTrajectory t = buildTrajectory(g, rng);
  Tape tape(false);
  EXPECT_THROW(computeLoss(tape, model, g, t, std::nullopt, {0.3, 10.0}, rng),
               std::invalid_argument);
  const LossBreakdown l =
      computeLoss(tape, model, g, t, std::nullopt, {0.3, 0.0}, rng);
  EXPECT_EQ(l.opt, 0.0);
}

TEST(Loss, ReconIsSumOfDecisionCrossEntropies) {
  Model model(qm9Vocab(), tinyConfig(), 43);
  const MolecularGraph g = mol("C=CN");
  Rng traj_rng(9);
  const TeacherTrajectory t = buildTrajectory(g, traj_rng);

  Rng rng(10);
  Tape tape(false);
  const LossBreakdown l = computeLoss(tape, model, g, t, 0.5, {0.3, 10.0}, rng);

  // Recompute every decision probability with scoreEdges on the same draws.
  Rng again(10);
  Tape tape2(false);
  const LatentEncoding enc = encode(tape2, model, g);
  const Var z = reparameterize(tape2, enc, again);
  const TypingResult typing =
      assignAtomTypes(tape2, model, z, histogramOfValences(g, false), nullptr,
                      DecodeMode::kTraining, typesOf(g), again);
  double expected = 0.0;
  for (int v = 0; v < g.atomCount(); ++v) {
    expected -= std::log(typing.probabilities(v, g.atom(v).type));
  }
  DecoderState s = initializeDecoderState(tape2, model, z, typesOf(g), again);
  s.start = s.focus = t.start;
  s.reached.assign(g.atomCount(), 0);
  s.reached[t.start] = 1;
  for (const TeacherDecision& d : t.decisions) {
    ASSERT_EQ(d.focus, s.focus);
    const EdgeScores sc = scoreEdges(tape2, model, s, s.focus);
    if (d.target == kStop) {
      expected -= std::log(sc.candidate.back());
      if (s.fifo.empty()) break;
      s.focus = s.fifo.front();
      s.fifo.pop_front();
      continue;
    }
    expected -= std::log(sc.joint(d.target, bondTypeIndex(d.order)));
    s.graph.addBond(d.focus, d.target, d.order);
    if (!s.reached[d.target]) {
      s.reached[d.target] = 1;
      s.fifo.push_back(d.target);
    }
    s.h = model.nets().decoderStates(s.h0, adjacencyOf(s.graph));
    std::vector<int> connected;
    for (int v = 0; v < s.graph.atomCount(); ++v) {
      if (s.graph.degree(v) > 0) connected.push_back(v);
    }
    s.h_t = meanRows(gatherRows(s.h, connected));
  }
  EXPECT_NEAR(l.recon, expected, 1e-4 * expected);
}

TEST(Loss, EveryParameterReceivesGradientOnToyBatch) {
  Model model(qm9Vocab(), tinyConfig(), 44);
  Rng rng(11);
  const auto graphs = corpusHead(20);
  model.parameters().zeroGrad();
  for (const auto& g : graphs) {
    Tape tape;
    const TeacherTrajectory t = buildTrajectory(g, rng);
    tape.backward(
        computeLoss(tape, model, g, t, proxyProperty(g, 9), {}, rng).total);
  }
  for (const Parameter* p : model.parameters().all()) {
    double norm = 0.0;
    for (const float v : p->grad.values()) norm += std::abs(v);
    EXPECT_GT(norm, 0.0) << p->name;
  }
}

TEST(Loss, ProxyProperty) {
  EXPECT_DOUBLE_EQ(proxyProperty(mol("CCO"), 9), 3.0 / 9.0);
  EXPECT_DOUBLE_EQ(proxyProperty(mol("CCCCCCCCCCC"), 9), 1.0);
  EXPECT_THROW(proxyProperty(mol("C"), 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Training loop

TEST(TrainLoop, ZeroEpochsWritesInitialParameters) {
  Model model(qm9Vocab(), tinyConfig(), 51);
  const auto path =
      (std::filesystem::temp_directory_path() / "ccgvae_zero_epochs.ckpt").string();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.checkpoint_path = path;
  Rng rng(12);
  const auto graphs = corpusHead(5);
  EXPECT_TRUE(trainLoop(model, graphs, proxies(graphs), cfg, rng).empty());
  const Checkpoint ckpt = readCheckpoint(path);
  ASSERT_NE(ckpt.meta("epoch"), nullptr);
  EXPECT_EQ(*ckpt.meta("epoch"), "0");
  for (const Parameter* p : model.parameters().all()) {
    ASSERT_NE(ckpt.tensor(p->name), nullptr);
    EXPECT_EQ(ckpt.tensor(p->name)->values(), p->value.values()) << p->name;
  }
  std::filesystem::remove(path);
}

TEST(TrainLoop, DeterministicForSeedAndLogsEpochLines) {
  const auto graphs = corpusHead(6);
  auto run = [&](std::ostream* log) {
    Model model(qm9Vocab(), tinyConfig(), 52);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    Rng rng(13);
    trainLoop(model, graphs, proxies(graphs), cfg, rng, log);
    return serializeCheckpoint(model.toCheckpoint());
  };
  std::ostringstream log;
  EXPECT_EQ(run(&log), run(nullptr));
  std::istringstream lines(log.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    int epoch;
    double recon, latent, opt, total;
    ASSERT_EQ(std::sscanf(line.c_str(),
                          "epoch=%d recon=%lf latent=%lf opt=%lf total=%lf",
                          &epoch, &recon, &latent, &opt, &total),
              5)
        << line;
    EXPECT_EQ(epoch, n);
    EXPECT_NEAR(total, recon + 0.3 * latent + 10.0 * opt, 1e-4 * total);
  }
  EXPECT_EQ(n, 2);
}

TEST(TrainLoop, TenMoleculeLossDropsNinetyPercentIn300Steps) {
  const auto graphs = corpusHead(10);
  const auto props = proxies(graphs);
  ModelConfig mc;
  mc.latent_dim = 16;
  mc.hidden_dim = 32;
  mc.encoder_steps = 4;
  mc.decoder_steps = 4;
  mc.mlp_hidden = 128;
  Model model(qm9Vocab(), mc, 53);
  Rng rng(14);
  // Expected loss over fresh trajectories and latent draws.
  const auto expectedLoss = [&] {
    double total = 0.0;
    for (int r = 0; r < 20; ++r) {
      total += evaluateLoss(model, graphs, props, {}, rng).total / 20.0;
    }
    return total;
  };
  const double initial = expectedLoss();
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.epochs = 300;  // one optimizer step per epoch
  cfg.adam.lr = 3e-3;
  trainLoop(model, graphs, props, cfg, rng);
  const double final_loss = expectedLoss();
  EXPECT_LE(final_loss, 0.1 * initial)
      << "initial " << initial << " final " << final_loss;
}

// ---------------------------------------------------------------------------
// Latent optimization

TEST(OptimizeLatent, ZeroStepLeavesLatentUnchanged) {
  Model model(qm9Vocab(), tinyConfig(), 61);
  Rng rng(15);
  const Tensor z = samplePrior(4, tinyConfig().latent_dim, rng);
  const LatentTrace t = optimizeLatent(model, z, Direction::kAscend, 10, 0.0);
  EXPECT_EQ(t.z.values(), z.values());
}

TEST(OptimizeLatent, LinearPredictorStepMatchesAnalyticMove) {
  Model model(qm9Vocab(), tinyConfig(), 62);
  // A large hidden bias keeps every ReLU active, making O affine in mean(z).
  const MLP& o = model.nets().o();
  o.hiddenLayer().bias()->value.fill(50.0f);
  const Eigen::MatrixXd w = o.hiddenLayer().weight().value.mat().cast<double>() *
                            o.outputLayer().weight().value.mat().cast<double>();
  Rng rng(16);
  const int m = 3;
  const Tensor z = samplePrior(m, tinyConfig().latent_dim, rng);
  const double step = 0.01;
  for (const Direction dir : {Direction::kAscend, Direction::kDescend}) {
    const LatentTrace t = optimizeLatent(model, z, dir, 1, step);
    const double sign = dir == Direction::kAscend ? 1.0 : -1.0;
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < z.cols(); ++c) {
        EXPECT_NEAR(t.z(r, c) - z(r, c), sign * step * w(c, 0) / m, 1e-6);
      }
    }
    EXPECT_EQ(t.rejected_steps, 0);
  }
}

TEST(OptimizeLatent, PredictionsAreMonotone) {
  Model model(qm9Vocab(), tinyConfig(), 63);
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor z = samplePrior(5, tinyConfig().latent_dim, rng);
    const LatentTrace up = optimizeLatent(model, z, Direction::kAscend, 50, 0.5);
    for (std::size_t i = 1; i < up.predictions.size(); ++i) {
      EXPECT_GE(up.predictions[i], up.predictions[i - 1]);
    }
    const LatentTrace down = optimizeLatent(model, z, Direction::kDescend, 50, 0.5);
    for (std::size_t i = 1; i < down.predictions.size(); ++i) {
      EXPECT_LE(down.predictions[i], down.predictions[i - 1]);
    }
  }
}

}  // namespace
}  // namespace ccgvae
