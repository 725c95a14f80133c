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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "ccgvae/canonical.h"
#include "ccgvae/decoder.h"
#include "ccgvae/encoder.h"
#include "ccgvae/metrics.h"
#include "ccgvae/model.h"
#include "ccgvae/smiles.h"
#include "ccgvae/training.h"
#include "ccgvae/valence_histogram.h"
#include "gradcheck_suites.h"
#include "oracles.h"
#include "replay.h"
#include "test_util.h"

namespace ccgvae {
namespace {

using testing::qm9Vocab;
using testing::toyCorpus;

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Toy training setup shared by the memorization, validity and latent
// optimization criteria.
constexpr int kMemorizationMolecules = 50;
constexpr int kMemorizationEpochs = 300;

ModelConfig toyModelConfig() {
  ModelConfig cfg;
  cfg.latent_dim = 32;
  cfg.hidden_dim = 32;
  cfg.encoder_steps = 4;
  cfg.decoder_steps = 4;
  cfg.mlp_hidden = 64;
  return cfg;
}

TrainConfig toyTrainConfig() {
  TrainConfig cfg;
  cfg.epochs = kMemorizationEpochs;
  cfg.batch_size = 5;
  cfg.adam.lr = 3e-3;
  return cfg;
}

constexpr int kProxyMaxAtoms = 9;

// ---------------------------------------------------------------------------
// 1 and 2: validity and histogram conditioning over 10,000 generations.

struct GenerationStats {
  std::size_t samples = 0;
  std::size_t valid = 0;
  std::size_t checked_steps = 0;
  std::size_t violations = 0;
  std::size_t fallback_molecules = 0;
};

GenerationStats generateAndCheck(const Model& model,
                                 const HistogramDistribution& dist,
                                 std::size_t n, Rng& rng) {
  GenerationStats s;
  for (std::size_t i = 0; i < n; ++i) {
    const DecodeOutput out = generateMolecule(model, dist, rng);
    ++s.samples;
    s.valid += isValidMolecule(out.molecule);
    if (out.typing.fallback_count > 0) {
      ++s.fallback_molecules;
      continue;
    }
    for (const TypingStep& step : out.typing.steps) {
      ++s.checked_steps;
      s.violations += !isCompatible(step.used, step.target);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// 3: mask exactness.

Outcome maskExactness() {
  std::size_t graphs = 0, decisions = 0, disagreements = 0;
  testing::forEachPartialGraph(qm9Vocab(), 4, [&](const MolecularGraph& g) {
    ++graphs;
    for (int focus = 0; focus < g.atomCount(); ++focus) {
      const EdgeMask m = edgeMask(g, focus);
      disagreements += m.candidates.back() != 1;
      for (int u = 0; u < g.atomCount(); ++u) {
        bool any = false;
        for (int k = 1; k <= 3; ++k) {
          const bool oracle = testing::bondKeepsGraphValid(g, focus, u, k);
          any = any || oracle;
          ++decisions;
          disagreements += m.types[u * 3 + k - 1] != oracle;
        }
        disagreements += m.candidates[u] != any;
      }
    }
  });
  return {disagreements == 0 && graphs > 0,
          "partial_graphs=" + std::to_string(graphs) +
              " decisions=" + std::to_string(decisions) +
              " disagreements=" + std::to_string(disagreements)};
}

// ---------------------------------------------------------------------------
// 4: gradients.

Outcome gradients() {
  const auto start = Clock::now();
  Rng rng(404);
  double worst = 0.0;
  std::string worst_name;
  std::size_t checks = 0;
  bool pass = true;
  for (const auto& suite :
       {testing::primitiveGradChecks(), testing::networkGradChecks()}) {
    for (const auto& check : suite) {
      const auto r = testing::worstOver(check, rng, testing::kGradTrials);
      ++checks;
      pass = pass && r.max_rel_error <= testing::kGradTolerance;
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        worst_name = check.name + " / " + r.worst;
      }
    }
  }
  const double seconds = secondsSince(start);
  pass = pass && seconds < 120.0;
  return {pass, "checks=" + std::to_string(checks) +
                    " trials_each=" + std::to_string(testing::kGradTrials) +
                    " max_rel_error=" + fmt("%.3g", worst) + " (" + worst_name +
                    ") tolerance=1e-4 seconds=" + fmt("%.1f", seconds)};
}

// ---------------------------------------------------------------------------
// 5: teacher-forcing identity.

Outcome teacherForcing() {
  std::size_t replays = 0, mismatches = 0;
  for (std::uint64_t draw = 0; draw < 3; ++draw) {
    const Model model(qm9Vocab(), toyModelConfig(), 500 + draw);
    Rng rng(600 + draw);
    for (const auto& g : toyCorpus().graphs) {
      const TeacherTrajectory t = buildTrajectory(g, rng);
      ++replays;
      mismatches += !testing::identical(testing::replay(model, g, t, rng), g);
    }
  }
  return {mismatches == 0 && replays == 3 * toyCorpus().size(),
          "molecules=" + std::to_string(toyCorpus().size()) +
              " parameter_draws=3 replays=" + std::to_string(replays) +
              " mismatches=" + std::to_string(mismatches)};
}

// ---------------------------------------------------------------------------
// 6: toy memorization.

double expectedLoss(const Model& model, const std::vector<MolecularGraph>& g,
                    const std::vector<std::optional<double>>& props, Rng& rng) {
  constexpr int kDraws = 10;
  double total = 0.0;
  for (int r = 0; r < kDraws; ++r) {
    total += evaluateLoss(model, g, props, {}, rng).total / kDraws;
  }
  return total;
}

Outcome memorization(Model& model) {
  const auto start = Clock::now();
  const auto& all = toyCorpus().graphs;
  const std::vector<MolecularGraph> train(all.begin(),
                                          all.begin() + kMemorizationMolecules);
  std::vector<std::optional<double>> props;
  for (const auto& g : train) props.push_back(proxyProperty(g, kProxyMaxAtoms));
  Rng rng(3);
  const double initial = expectedLoss(model, train, props, rng);
  trainLoop(model, train, props, toyTrainConfig(), rng);
  const double final_loss = expectedLoss(model, train, props, rng);
  const ReconstructionReport rec =
      reconstructionRate(model, train, {20, 5000}, rng);
  const double seconds = secondsSince(start);
  const double drop = 1.0 - final_loss / initial;
  const bool pass =
      rec.rate.percent() >= 50.0 && drop >= 0.90 && seconds < 1800.0;
  return {pass, "molecules=" + std::to_string(kMemorizationMolecules) +
                    " epochs=" + std::to_string(kMemorizationEpochs) +
                    " reconstruction=" + fmt("%.2f", rec.rate.percent()) +
                    "% (need >= 50) loss_initial=" + fmt("%.3f", initial) +
                    " loss_final=" + fmt("%.3f", final_loss) +
                    " drop=" + fmt("%.1f", 100.0 * drop) +
                    "% (need >= 90) seconds=" + fmt("%.0f", seconds)};
}

// ---------------------------------------------------------------------------
// 7: histogram definitions on methane and ethanol.

Outcome histogramDefinitions() {
  const auto methane = histogramOfValences(parseSmiles("C", qm9Vocab()), true);
  const auto ethanol = histogramOfValences(parseSmiles("CCO", qm9Vocab()), true);
  const bool literal = methane == ValenceHistogram::of(4, {{1, 4}, {4, 1}}) &&
                       ethanol ==
                           ValenceHistogram::of(4, {{1, 6}, {2, 1}, {4, 2}});
  const bool forward = isCompatible(methane, ethanol);
  const bool reverse = isCompatible(ethanol, methane);
  return {literal && forward && !reverse,
          "methane=" + methane.toString() + " ethanol=" + ethanol.toString() +
              " methane_in_ethanol=" + (forward ? "true" : "false") +
              " ethanol_in_methane=" + (reverse ? "true" : "false")};
}

// ---------------------------------------------------------------------------
// 8: SMILES round trip and canonical forms.

Outcome smilesRoundTrip() {
  const auto start = Clock::now();
  Rng rng(808);
  std::size_t round_trip_failures = 0, canonical_failures = 0;
  for (const auto& g : toyCorpus().graphs) {
    const MolecularGraph again = parseSmiles(writeSmiles(g), qm9Vocab());
    round_trip_failures += !isomorphic(g, again);
    const std::string form = canonicalForm(g);
    std::vector<int> perm(g.atomCount());
    std::iota(perm.begin(), perm.end(), 0);
    bool same = true;
    for (int k = 0; k < 100; ++k) {
      std::shuffle(perm.begin(), perm.end(), rng);
      same = same && canonicalForm(permuteAtoms(g, perm)) == form;
    }
    canonical_failures += !same;
  }
  const double seconds = secondsSince(start);
  return {round_trip_failures == 0 && canonical_failures == 0 && seconds < 60.0,
          "molecules=" + std::to_string(toyCorpus().size()) +
              " round_trip_failures=" + std::to_string(round_trip_failures) +
              " canonical_failures=" + std::to_string(canonical_failures) +
              " seconds=" + fmt("%.1f", seconds)};
}

// ---------------------------------------------------------------------------
// 9: sampling statistics.

double chiSquarePValue(const std::vector<double>& observed,
                       const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Worst |observed - expected| / sigma over the entries.
double maxSigma(const std::vector<double>& observed,
                const std::vector<double>& expected, double n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double p = expected[i] / n;
    worst = std::max(worst, std::abs(observed[i] - expected[i]) /
                                std::sqrt(n * p * (1.0 - p)));
  }
  return worst;
}

Outcome samplingStatistics(const HistogramDistribution& dist) {
  const auto start = Clock::now();
  constexpr int kDraws = 100000;
  Rng rng(909);

  std::map<ValenceHistogram, double> seen;
  for (int i = 0; i < kDraws; ++i) ++seen[sampleInitial(dist, rng).histogram];
  std::vector<double> obs, exp;
  for (const auto& e : dist.entries()) {
    obs.push_back(seen[e.histogram]);
    exp.push_back(kDraws * static_cast<double>(e.weight) / dist.totalWeight());
  }
  const double p_initial = chiSquarePValue(obs, exp);
  const double s_initial = maxSigma(obs, exp, kDraws);

  // Condition on a used histogram that leaves several compatible entries.
  const ValenceHistogram used = ValenceHistogram::of(dist.nu(), {{4, 3}, {2, 1}});
  std::uint64_t support_weight = 0;
  for (const auto& e : dist.entries()) {
    if (isCompatible(used, e.histogram)) support_weight += e.weight;
  }
  std::map<ValenceHistogram, double> cond;
  std::size_t outside = 0;
  for (int i = 0; i < kDraws; ++i) {
    const HistogramSample s = sampleCompatible(dist, used, 1, rng);
    outside += s.fallback || !isCompatible(used, s.histogram);
    ++cond[s.histogram];
  }
  std::vector<double> cobs, cexp;
  for (const auto& e : dist.entries()) {
    if (!isCompatible(used, e.histogram)) continue;
    cobs.push_back(cond[e.histogram]);
    cexp.push_back(kDraws * static_cast<double>(e.weight) / support_weight);
  }
  const double p_cond = chiSquarePValue(cobs, cexp);
  const double s_cond = maxSigma(cobs, cexp, kDraws);
  const double seconds = secondsSince(start);
  // The max sigma over many entries is reported only; the goodness-of-fit
  // test is the chi-square p-value.
  const bool pass =
      p_initial > 0.001 && p_cond > 0.001 && outside == 0 && seconds < 60.0;
  return {pass, "draws=100000 initial_entries=" +
                    std::to_string(dist.size()) + " initial_p=" +
                    fmt("%.4f", p_initial) + " initial_max_sigma=" +
                    fmt("%.2f", s_initial) + " compatible_entries=" +
                    std::to_string(cobs.size()) + " compatible_p=" +
                    fmt("%.4f", p_cond) + " compatible_max_sigma=" +
                    fmt("%.2f", s_cond) + " outside_support=" +
                    std::to_string(outside) + " seconds=" + fmt("%.1f", seconds)};
}

// ---------------------------------------------------------------------------
// 10: latent optimization.

Outcome latentOptimization(const Model& model,
                           const HistogramDistribution& dist) {
  Rng rng(1010);
  double worst_drop = 0.0, mean_gain = 0.0;
  for (int start = 0; start < 100; ++start) {
    const int m = sampleInitial(dist, rng).atoms;
    const Tensor z = samplePrior(m, model.config().latent_dim, rng);
    const LatentTrace t = optimizeLatent(model, z, Direction::kAscend, 50, 0.1);
    for (const double p : t.predictions) {
      worst_drop = std::max(worst_drop, t.predictions.front() - p);
    }
    mean_gain += (t.predictions.back() - t.predictions.front()) / 100.0;
  }
  return {worst_drop <= 1e-6,
          "starts=100 steps=50 worst_drop=" + fmt("%.3g", worst_drop) +
              " (tolerance 1e-6) mean_gain=" + fmt("%.4f", mean_gain)};
}

}  // namespace
}  // namespace ccgvae

int main() {
  using namespace ccgvae;
  std::map<int, std::pair<std::string, Outcome>> results;
  const auto run = [&](int id, const char* name,
                       const std::function<Outcome()>& fn) {
    std::cerr << "running criterion " << id << " (" << name << ")\n";
    results[id] = {name, fn()};
  };

  const HistogramDistribution dist =
      HistogramDistribution::build(toyCorpus().graphs);

  run(3, "mask exactness", maskExactness);
  run(4, "gradient correctness", gradients);
  run(5, "teacher-forcing identity", teacherForcing);
  run(7, "histogram definitions", histogramDefinitions);
  run(8, "SMILES round trip and canonicalization", smilesRoundTrip);
  run(9, "distribution sampling statistics",
      [&] { return samplingStatistics(dist); });

  Model trained(qm9Vocab(), toyModelConfig(), 1);
  run(6, "toy memorization", [&] { return memorization(trained); });

  const auto gen_start = Clock::now();
  const Model untrained(qm9Vocab(), toyModelConfig(), 2);
  Rng gen_rng(101);
  const GenerationStats a = generateAndCheck(untrained, dist, 10000, gen_rng);
  const GenerationStats b = generateAndCheck(trained, dist, 10000, gen_rng);
  const double gen_seconds = secondsSince(gen_start);
  run(1, "validity invariant", [&] {
    const bool pass = a.valid == a.samples && b.valid == b.samples &&
                      a.samples == 10000 && b.samples == 10000 &&
                      gen_seconds < 600.0;
    return Outcome{pass, "random_init_valid=" + std::to_string(a.valid) + "/" +
                             std::to_string(a.samples) + " trained_valid=" +
                             std::to_string(b.valid) + "/" +
                             std::to_string(b.samples) + " seconds=" +
                             fmt("%.0f", gen_seconds)};
  });
  run(2, "histogram conditioning", [&] {
    const std::size_t violations = a.violations + b.violations;
    const double fallback_rate =
        100.0 * static_cast<double>(a.fallback_molecules + b.fallback_molecules) /
        static_cast<double>(a.samples + b.samples);
    return Outcome{violations == 0 && a.checked_steps + b.checked_steps > 0,
                   "checked_steps=" +
                       std::to_string(a.checked_steps + b.checked_steps) +
                       " violations=" + std::to_string(violations) +
                       " fallback_rate=" + fmt("%.2f", fallback_rate) + "%"};
  });
  run(10, "latent optimization",
      [&] { return latentOptimization(trained, dist); });

  bool all = true;
  for (const auto& [id, entry] : results) {
    const auto& [name, outcome] = entry;
    std::cout << "criterion " << id << " [" << name << "] "
              << (outcome.pass ? "PASS" : "FAIL") << ": " << outcome.detail
              << "\n";
    all = all && outcome.pass;
  }
  std::cout << (all ? "all criteria passed" : "some criteria failed") << "\n";
  return all ? 0 : 1;
}
