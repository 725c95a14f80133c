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

#include "ccgvae/metrics.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ccgvae/canonical.h"
#include "ccgvae/model.h"
#include "test_util.h"

namespace ccgvae {
namespace {

using testing::mol;
using testing::qm9Vocab;
using testing::tinyConfig;
using testing::toyCorpus;

std::span<const MolecularGraph> corpusHead(std::size_t n) {
  return std::span<const MolecularGraph>(toyCorpus().graphs).first(n);
}

// ---------------------------------------------------------------------------
// Fingerprints

TEST(Fingerprint, DeterministicAndPermutationInvariant) {
  Rng rng(1);
  for (const auto& g : toyCorpus().graphs) {
    const Fingerprint fp = fingerprint(g);
    EXPECT_EQ(fp, fingerprint(g));
    EXPECT_GT(fp.count(), 0);
    std::vector<int> perm(g.atomCount());
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(perm.begin(), perm.end(), rng);
      EXPECT_EQ(fingerprint(permuteAtoms(g, perm)), fp) << writeSmiles(g);
    }
  }
}

TEST(Fingerprint, SeparatesSimpleMolecules) {
  EXPECT_NE(fingerprint(mol("CCO")), fingerprint(mol("CCN")));
  EXPECT_NE(fingerprint(mol("CCO")), fingerprint(mol("CC=O")));
  EXPECT_LT(tanimoto(fingerprint(mol("CCCO")), fingerprint(mol("CCCN"))), 1.0);
  EXPECT_GT(tanimoto(fingerprint(mol("CCCO")), fingerprint(mol("CCCN"))), 0.0);
}

TEST(Fingerprint, WidthAndEmptyGraph) {
  const Fingerprint fp = fingerprint(mol("CC(=O)N"), 64);
  EXPECT_EQ(fp.width(), 64);
  EXPECT_EQ(fingerprint(MolecularGraph(qm9Vocab())).count(), 0);
  EXPECT_THROW(Fingerprint(0), std::invalid_argument);
}

TEST(Tanimoto, IdenticalDisjointAndEmpty) {
  const Fingerprint a = fingerprint(mol("OCC(F)C=O"));
  EXPECT_DOUBLE_EQ(tanimoto(a, a), 1.0);
  Fingerprint x(128), y(128);
  x.set(3);
  x.set(70);
  y.set(4);
  EXPECT_DOUBLE_EQ(tanimoto(x, y), 0.0);
  EXPECT_DOUBLE_EQ(tanimoto(Fingerprint(128), Fingerprint(128)), 1.0);
  EXPECT_THROW(tanimoto(Fingerprint(128), Fingerprint(256)),
               std::invalid_argument);
}

TEST(Tanimoto, MatchesSetOracleOnRandomSparseBits) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int width = 1 + static_cast<int>(uniformIndex(rng, 300));
    Fingerprint a(width), b(width);
    std::set<int> sa, sb;
    const int na = static_cast<int>(uniformIndex(rng, 12));
    const int nb = static_cast<int>(uniformIndex(rng, 12));
    for (int i = 0; i < na; ++i) {
      const int bit = static_cast<int>(uniformIndex(rng, width));
      a.set(bit);
      sa.insert(bit);
    }
    for (int i = 0; i < nb; ++i) {
      const int bit = static_cast<int>(uniformIndex(rng, width));
      b.set(bit);
      sb.insert(bit);
    }
    std::set<int> both, either;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::inserter(both, both.begin()));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(),
                   std::inserter(either, either.begin()));
    const double expected =
        either.empty() ? 1.0 : static_cast<double>(both.size()) / either.size();
    EXPECT_DOUBLE_EQ(tanimoto(a, b), expected);
    EXPECT_EQ(a.count(), static_cast<int>(sa.size()));
  }
}

// ---------------------------------------------------------------------------
// Validity and rates

TEST(Validity, RequiresNonEmptyConnectedAndValenceValid) {
  EXPECT_TRUE(isValidMolecule(mol("CCO")));
  EXPECT_FALSE(isValidMolecule(MolecularGraph(qm9Vocab())));
  EXPECT_FALSE(isValidMolecule(mol("C.C")));
}

TEST(Rate, PercentAndBernoulliStd) {
  const Rate r{1, 4};
  EXPECT_DOUBLE_EQ(r.percent(), 25.0);
  EXPECT_DOUBLE_EQ(r.stddev(), 100.0 * std::sqrt(0.25 * 0.75));
  EXPECT_DOUBLE_EQ((Rate{0, 0}).percent(), 0.0);
  EXPECT_DOUBLE_EQ((Rate{5, 5}).stddev(), 0.0);
}

// ---------------------------------------------------------------------------
// Reconstruction protocol

TEST(Reconstruction, IdentityOracleScoresHundredPercent) {
  Rng rng(3);
  const auto identity = [](const MolecularGraph& g, Rng&) { return g; };
  const ReconstructionReport r =
      reconstructionRate(corpusHead(30), identity, {}, rng);
  EXPECT_EQ(r.molecules, 30u);
  EXPECT_EQ(r.rate.trials, 30u * 20u);
  EXPECT_DOUBLE_EQ(r.rate.percent(), 100.0);
}

TEST(Reconstruction, PermutedIdentityStillScoresHundredPercent) {
  Rng rng(4);
  const auto permuted = [](const MolecularGraph& g, Rng& r) {
    std::vector<int> perm(g.atomCount());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), r);
    return permuteAtoms(g, perm);
  };
  EXPECT_DOUBLE_EQ(
      reconstructionRate(corpusHead(30), permuted, {3, 100}, rng).rate.percent(),
      100.0);
}

TEST(Reconstruction, CapAndEncodingCount) {
  Rng rng(5);
  std::size_t calls = 0;
  const auto counting = [&](const MolecularGraph& g, Rng&) {
    ++calls;
    return g;
  };
  const ReconstructionReport r =
      reconstructionRate(corpusHead(40), counting, {7, 11}, rng);
  EXPECT_EQ(r.molecules, 11u);
  EXPECT_EQ(calls, 77u);
  EXPECT_EQ(r.rate.trials, 77u);
  EXPECT_THROW(reconstructionRate(corpusHead(2), counting, {0, 5}, rng),
               std::invalid_argument);
}

TEST(Reconstruction, RelaxedPredicateNeverLowersTheRate) {
  const Model model(qm9Vocab(), tinyConfig(), 6);
  const auto sameAtomCount = [](const MolecularGraph& a,
                                const MolecularGraph& b) {
    return a.atomCount() == b.atomCount();
  };
  Rng a(7), b(7);
  const ReconstructionConfig cfg{4, 60};
  const double strict =
      reconstructionRate(model, corpusHead(60), cfg, a).rate.percent();
  const double relaxed =
      reconstructionRate(model, corpusHead(60), cfg, b, sameAtomCount)
          .rate.percent();
  EXPECT_LE(strict, relaxed);
}

TEST(Reconstruction, UntrainedModelRarelyReconstructsLargerMolecules) {
  const Model model(qm9Vocab(), tinyConfig(), 8);
  std::vector<MolecularGraph> large;
  for (const auto& g : toyCorpus().graphs) {
    if (g.atomCount() >= 7) large.push_back(g);
  }
  ASSERT_GE(large.size(), 50u);
  Rng rng(9);
  const ReconstructionReport r = reconstructionRate(model, large, {4, 50}, rng);
  EXPECT_EQ(r.rate.trials, 200u);
  EXPECT_LT(r.rate.percent(), 10.0);
}

// ---------------------------------------------------------------------------
// Generation metrics

TEST(Samples, ReplayOfTrainingSetIsNeitherNovelNorDiverse) {
  const auto train = corpusHead(40);
  const TrainingIndex index(train);
  std::vector<MolecularGraph> replay(train.begin(), train.end());
  replay.insert(replay.end(), train.begin(), train.begin() + 10);
  const SampleReport r = evaluateSamples(replay, index);
  std::set<std::string> forms;
  for (const auto& g : replay) forms.insert(canonicalForm(g));
  EXPECT_EQ(r.samples, 50u);
  EXPECT_EQ(r.valid, 50u);
  EXPECT_DOUBLE_EQ(r.validity, 100.0);
  EXPECT_DOUBLE_EQ(r.novelty, 0.0);
  EXPECT_EQ(r.unique, forms.size());
  EXPECT_DOUBLE_EQ(r.uniqueness, 100.0 * forms.size() / 50.0);
  EXPECT_NEAR(r.diversity, 0.0, 1e-12);
}

TEST(Samples, IdenticalOutputsHaveUniquenessOneOverN) {
  const auto train = corpusHead(20);
  const TrainingIndex index(train);
  const std::vector<MolecularGraph> same(25, mol("CC(C)(C)C#N"));
  const SampleReport r = evaluateSamples(same, index);
  EXPECT_EQ(r.unique, 1u);
  EXPECT_DOUBLE_EQ(r.uniqueness, 100.0 / 25.0);
}

TEST(Samples, InvalidSamplesOnlyLowerValidity) {
  const TrainingIndex index(corpusHead(20));
  const std::vector<MolecularGraph> samples{
      mol("CCO"), mol("C.C"), MolecularGraph(qm9Vocab()), mol("CCN")};
  const SampleReport r = evaluateSamples(samples, index);
  EXPECT_EQ(r.samples, 4u);
  EXPECT_EQ(r.valid, 2u);
  EXPECT_DOUBLE_EQ(r.validity, 50.0);
  EXPECT_LE(r.unique, r.valid);
  EXPECT_LE(r.novel, r.valid);
  EXPECT_GT(r.diversity, 0.0);
}

TEST(Samples, DiversityIsMeanDissimilarityToNearestTrainingMolecule) {
  const std::vector<MolecularGraph> train{mol("CCO"), mol("CCCN")};
  const TrainingIndex index(train);
  const std::vector<MolecularGraph> samples{mol("CCCO"), mol("C#N")};
  double expected = 0.0;
  for (const auto& s : samples) {
    double best = 0.0;
    for (const auto& t : train) {
      best = std::max(best, tanimoto(fingerprint(s), fingerprint(t)));
    }
    expected += 100.0 * (1.0 - best) / samples.size();
  }
  EXPECT_NEAR(evaluateSamples(samples, index).diversity, expected, 1e-9);
}

TEST(Generation, UntrainedModelIsAlwaysValid) {
  const Model model(qm9Vocab(), tinyConfig(), 10);
  const auto train = corpusHead(100);
  const HistogramDistribution dist = HistogramDistribution::build(train);
  Rng rng(11);
  const SampleReport r =
      generationReport(model, dist, TrainingIndex(train), 500, rng);
  EXPECT_EQ(r.samples, 500u);
  EXPECT_EQ(r.valid, 500u);
  EXPECT_LE(r.unique, r.valid);
}

// ---------------------------------------------------------------------------
// Report formatting

TEST(Report, KeyValueLinesAndTableColumnOrder) {
  EvaluationReport report;
  report.reconstruction = ReconstructionReport{{1, 4}, 2, 2, 0};
  SampleReport s;
  s.samples = 10;
  s.valid = 10;
  s.validity = 100.0;
  s.novelty = 50.0;
  s.novelty_std = 50.0;
  report.generation = s;
  const std::string kv = formatReport(report);
  EXPECT_NE(kv.find("reconstruction=25.00\n"), std::string::npos);
  EXPECT_NE(kv.find("validity=100.00\n"), std::string::npos);
  EXPECT_NE(kv.find("novelty_std=50.00\n"), std::string::npos);
  EXPECT_NE(kv.find("fingerprint_width=2048\n"), std::string::npos);

  std::istringstream table(formatTable(report, ','));
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  EXPECT_EQ(header, "%Rec.,%Val.,%Nov.,%Uniq.,%Div.");
  EXPECT_EQ(row.substr(0, row.find(',')), "25.00±43.30");

  EvaluationReport only_gen;
  only_gen.generation = s;
  EXPECT_EQ(formatTable(only_gen).substr(formatTable(only_gen).find('\n') + 1, 2),
            "-\t");
}

}  // namespace
}  // namespace ccgvae
