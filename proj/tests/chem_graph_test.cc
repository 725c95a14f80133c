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

#include "ccgvae/chem_graph.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ccgvae/canonical.h"
#include "ccgvae/smiles.h"

namespace ccgvae {
namespace {

std::shared_ptr<const AtomVocabulary> Qm9() {
  static const auto vocab =
      std::make_shared<const AtomVocabulary>(AtomVocabulary::qm9());
  return vocab;
}

TEST(AtomVocabularyTest, ParsesAndSerializes) {
  const auto v = AtomVocabulary::parse("# c\nC 4\n\nN 3\nO 2\nF 1\n");
  EXPECT_EQ(v, AtomVocabulary::qm9());
  EXPECT_EQ(v.serialize(), "C:4,N:3,O:2,F:1");
  EXPECT_EQ(AtomVocabulary::deserialize(v.serialize()), v);
  EXPECT_EQ(v.maxValence(), 4);
  EXPECT_EQ(v.indexOf("O"), 2);
  EXPECT_FALSE(v.indexOf("Cl").has_value());
}

TEST(AtomVocabularyTest, FingerprintDependsOnOrder) {
  const auto a = AtomVocabulary::parse("C 4\nN 3\n");
  const auto b = AtomVocabulary::parse("N 3\nC 4\n");
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), AtomVocabulary::parse("C 4\nN 3").fingerprint());
}

TEST(AtomVocabularyTest, RejectsBadInput) {
  EXPECT_THROW(AtomVocabulary({}), std::invalid_argument);
  EXPECT_THROW(AtomVocabulary::parse("C 4\nC 4\n"), std::invalid_argument);
  EXPECT_THROW(AtomVocabulary::parse("C 0\n"), std::invalid_argument);
  EXPECT_THROW(AtomVocabulary::parse("C four\n"), std::invalid_argument);
}

TEST(AtomVocabularyTest, LoadsBundledFiles) {
  const auto qm9 = AtomVocabulary::load(CCGVAE_DATA_DIR "/vocab_qm9.txt");
  EXPECT_EQ(qm9, AtomVocabulary::qm9());
  const auto zinc = AtomVocabulary::load(CCGVAE_DATA_DIR "/vocab_zinc.txt");
  EXPECT_EQ(zinc.size(), 9u);
  EXPECT_EQ(zinc[*zinc.indexOf("Cl")].valence, 1);
}

TEST(MolecularGraphTest, RejectsInvariantViolations) {
  MolecularGraph g(Qm9());
  const int c = g.addAtom(0);
  const int o = g.addAtom(2);
  const int f = g.addAtom(3);
  EXPECT_THROW(g.addBond(c, c, BondOrder::kSingle), GraphError);
  g.addBond(c, o, BondOrder::kDouble);
  EXPECT_THROW(g.addBond(o, c, BondOrder::kSingle), GraphError);
  EXPECT_THROW(g.addBond(o, f, BondOrder::kSingle), GraphError);
  EXPECT_THROW(g.addBond(c, f, BondOrder::kDouble), GraphError);
  g.addBond(c, f, BondOrder::kSingle);
  EXPECT_EQ(g.bondOrderSum(c), 3);
  EXPECT_EQ(remainingValence(g, c), 1);
  EXPECT_EQ(remainingValence(g, o), 0);
  EXPECT_THROW(remainingValence(g, 7), std::out_of_range);
  EXPECT_THROW(g.setImplicitHydrogens(c, 2), GraphError);
  g.setImplicitHydrogens(c, 1);
  EXPECT_TRUE(isValenceValid(g));
  EXPECT_TRUE(isConnected(g));
}

TEST(MolecularGraphTest, HydrogenCompletionAndIsolatedRemoval) {
  MolecularGraph g(Qm9());
  g.addAtom(0);
  g.addAtom(1);
  g.addAtom(2);
  g.addBond(0, 2, BondOrder::kSingle);
  const auto h = completeWithHydrogens(g);
  EXPECT_EQ(h.atom(0).implicit_h, 3);
  EXPECT_EQ(h.atom(1).implicit_h, 3);
  EXPECT_EQ(h.atom(2).implicit_h, 1);
  EXPECT_FALSE(isConnected(h));
  const auto r = removeIsolatedAtoms(h);
  ASSERT_EQ(r.atomCount(), 2);
  EXPECT_EQ(r.atom(0).type, 0);
  EXPECT_EQ(r.atom(1).type, 2);
  EXPECT_TRUE(isConnected(r));

  MolecularGraph lone(Qm9());
  lone.addAtom(0);
  lone.addAtom(0);
  EXPECT_TRUE(removeIsolatedAtoms(lone).empty());
  EXPECT_FALSE(isConnected(MolecularGraph(Qm9())));
}

TEST(MolecularGraphTest, BfsDistances) {
  const auto g = parseSmiles("CCC.O", Qm9());
  EXPECT_EQ(bfsDistances(g, 0), (std::vector<int>{0, 1, 2, -1}));
}

TEST(MolecularGraphTest, PermuteAtomsKeepsStructure) {
  const auto g = parseSmiles("OC1=CC(F)=NC=C1", Qm9());
  std::vector<int> perm(g.atomCount());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto p = permuteAtoms(g, perm);
  for (int i = 0; i < g.atomCount(); ++i) {
    EXPECT_EQ(p.atom(perm[i]).type, g.atom(i).type);
    for (const auto& n : g.neighbors(i)) {
      EXPECT_EQ(p.bondBetween(perm[i], perm[n.atom]), n.order);
    }
  }
  EXPECT_TRUE(isomorphic(g, p));
}

TEST(CanonicalTest, EthanolForm) {
  EXPECT_EQ(canonicalForm(parseSmiles("OCC", Qm9())), "C2.C3.O1|0-1:1,0-2:1");
  EXPECT_EQ(canonicalForm(parseSmiles("CCO", Qm9())), "C2.C3.O1|0-1:1,0-2:1");
}

TEST(CanonicalTest, DistinguishesNonIsomorphic) {
  // Bicyclo[4.2.0] vs bicyclo[3.3.0]: same atoms and degree sequence.
  const auto a = parseSmiles("C1CCC2CCC2C1", Qm9());
  const auto b = parseSmiles("C1CC2CCCC2C1", Qm9());
  const auto c = parseSmiles("C1CCCC1C1CC1", Qm9());
  EXPECT_FALSE(isomorphic(a, c));
  EXPECT_FALSE(isomorphic(parseSmiles("CC(C)CO", Qm9()),
                          parseSmiles("CCC(C)O", Qm9())));
  EXPECT_FALSE(isomorphic(parseSmiles("C=CCC=O", Qm9()),
                          parseSmiles("CC=CC=O", Qm9())));
  EXPECT_FALSE(isomorphic(a, b));
}

TEST(CanonicalTest, SymmetricGraphsArePermutationInvariant) {
  // Highly symmetric graphs stress the individualization search.
  for (const char* s : {"C1CCCCC1", "C12C3C4C1C5C2C3C45", "CC(C)(C)C",
                        "C1CC2CCC1CC2"}) {
    const auto g = parseSmiles(s, Qm9());
    const std::string expected = canonicalForm(g);
    std::vector<int> perm(g.atomCount());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(11);
    for (int t = 0; t < 50; ++t) {
      std::shuffle(perm.begin(), perm.end(), rng);
      EXPECT_EQ(canonicalForm(permuteAtoms(g, perm)), expected) << s;
    }
  }
}

}  // namespace
}  // namespace ccgvae
