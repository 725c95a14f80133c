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

#include "ccgvae/valence_histogram.h"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>

#include "test_util.h"

namespace ccgvae {
namespace {

using testing::qm9Vocab;

ValenceHistogram withH(std::string_view smiles) {
  return histogramOfValences(parseSmiles(smiles, qm9Vocab()), true);
}

TEST(ValenceHistogramTest, MethaneAndEthanol) {
  const auto methane = withH("C");
  const auto ethanol = withH("CCO");
  EXPECT_EQ(methane, ValenceHistogram::of(4, {{1, 4}, {4, 1}}));
  EXPECT_EQ(ethanol, ValenceHistogram::of(4, {{1, 6}, {2, 1}, {4, 2}}));
  EXPECT_EQ(methane.toString(), "{1:4,4:1}");
  EXPECT_TRUE(isCompatible(methane, ethanol));
  EXPECT_FALSE(isCompatible(ethanol, methane));
}

TEST(ValenceHistogramTest, HeavyAtomOnly) {
  EXPECT_EQ(histogramOfValences(parseSmiles("CCO", qm9Vocab()), false),
            ValenceHistogram::of(4, {{2, 1}, {4, 2}}));
}

TEST(ValenceHistogramTest, CompatibilityIsReflexiveAndRejectsNuMismatch) {
  const auto a = ValenceHistogram::of(4, {{1, 2}, {3, 1}});
  EXPECT_TRUE(isCompatible(a, a));
  EXPECT_TRUE(isCompatible(ValenceHistogram(4), a));
  EXPECT_THROW(isCompatible(a, ValenceHistogram(3)), std::invalid_argument);
}

TEST(ValenceHistogramTest, SubtractAndUpdate) {
  const auto total = ValenceHistogram::of(4, {{2, 1}, {4, 2}});
  auto used = ValenceHistogram(4);
  used = updateWithValence(used, 4);
  EXPECT_EQ(subtract(total, used), ValenceHistogram::of(4, {{2, 1}, {4, 1}}));
  used = updateWithValence(used, 1);
  EXPECT_THROW(subtract(total, used), HistogramError);
  EXPECT_THROW(updateWithValence(used, 5), HistogramError);
  EXPECT_THROW(updateWithValence(used, 0), HistogramError);
}

TEST(HistogramDistributionTest, BuildAndSerialize) {
  std::vector<MolecularGraph> corpus;
  for (const char* s : {"CCO", "OCC", "C=O"}) {
    corpus.push_back(parseSmiles(s, qm9Vocab()));
  }
  const auto dist = HistogramDistribution::build(corpus);
  ASSERT_EQ(dist.size(), 2u);
  EXPECT_EQ(dist.totalWeight(), 3u);
  const auto text = dist.serialize();
  EXPECT_EQ(text, "nu=4\n0 1 0 1\t1\n0 1 0 2\t2\n");
  const auto back = HistogramDistribution::parse(text);
  ASSERT_EQ(back.size(), dist.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.entries()[i].histogram, dist.entries()[i].histogram);
    EXPECT_EQ(back.entries()[i].weight, dist.entries()[i].weight);
  }
  EXPECT_THROW(HistogramDistribution::build(std::span<const MolecularGraph>()),
               HistogramError);
  EXPECT_THROW(HistogramDistribution::parse("nu=4\n1 2\t1\n"), HistogramError);
  EXPECT_THROW(HistogramDistribution::parse("nu=2\n1 2\t0\n"), HistogramError);
}

HistogramDistribution threeEntryDist() {
  return HistogramDistribution(
      4, {{ValenceHistogram::of(4, {{4, 1}}), 5},
          {ValenceHistogram::of(4, {{4, 2}, {2, 1}}), 3},
          {ValenceHistogram::of(4, {{4, 3}, {1, 1}}), 2}});
}

double chiSquarePValue(const std::vector<int>& observed,
                       const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

TEST(SamplingTest, SampleInitialMatchesWeights) {
  const auto dist = threeEntryDist();
  Rng rng(1);
  constexpr int kDraws = 100000;
  std::map<ValenceHistogram, int> seen;
  for (int i = 0; i < kDraws; ++i) {
    const auto s = sampleInitial(dist, rng);
    EXPECT_EQ(s.atoms, s.histogram.total());
    ++seen[s.histogram];
  }
  std::vector<int> obs;
  std::vector<double> exp;
  for (const auto& e : dist.entries()) {
    obs.push_back(seen[e.histogram]);
    exp.push_back(kDraws * static_cast<double>(e.weight) / dist.totalWeight());
  }
  EXPECT_GT(chiSquarePValue(obs, exp), 0.001);
}

TEST(SamplingTest, SampleCompatibleRestrictsSupport) {
  const auto dist = threeEntryDist();
  Rng rng(2);
  const auto used = ValenceHistogram::of(4, {{4, 2}});
  std::map<ValenceHistogram, int> seen;
  for (int i = 0; i < 100000; ++i) {
    const auto s = sampleCompatible(dist, used, 1, rng);
    EXPECT_FALSE(s.fallback);
    EXPECT_TRUE(isCompatible(used, s.histogram));
    ++seen[s.histogram];
  }
  EXPECT_EQ(seen.size(), 2u);
  const std::vector<int> obs = {seen[dist.entries()[1].histogram],
                                seen[dist.entries()[2].histogram]};
  const double w1 = dist.entries()[1].weight, w2 = dist.entries()[2].weight;
  EXPECT_GT(chiSquarePValue(obs, {1e5 * w1 / (w1 + w2), 1e5 * w2 / (w1 + w2)}),
            0.001);
}

TEST(SamplingTest, MinAtomsAndFallback) {
  const auto dist = threeEntryDist();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto s = sampleCompatible(dist, ValenceHistogram(4), 4, rng);
    EXPECT_FALSE(s.fallback);
    EXPECT_EQ(s.histogram.total(), 4);
  }
  const auto s =
      sampleCompatible(dist, ValenceHistogram::of(4, {{3, 1}}), 1, rng);
  EXPECT_TRUE(s.fallback);
}

}  // namespace
}  // namespace ccgvae
