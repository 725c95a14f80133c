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

#ifndef CCGVAE_CHEM_GRAPH_H_
#define CCGVAE_CHEM_GRAPH_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccgvae {

// Raised when an operation would break the bond/valence invariants of a
// MolecularGraph (self loop, parallel bond, valence overflow).
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AtomType {
  std::string symbol;
  int valence = 0;  // bond-order units

  bool operator==(const AtomType&) const = default;
};

// Ordered list of atom types. The position of a type is its one-hot index,
// so two vocabularies with the same members in a different order are
// different vocabularies.
class AtomVocabulary {
 public:
  explicit AtomVocabulary(std::vector<AtomType> types);

  // C(4) N(3) O(2) F(1).
  static AtomVocabulary qm9();

  // One "symbol valence" pair per line; blank lines and '#' comments skipped.
  static AtomVocabulary parse(std::string_view text);
  static AtomVocabulary load(const std::string& path);

  std::size_t size() const { return types_.size(); }
  const AtomType& operator[](std::size_t i) const { return types_[i]; }
  std::span<const AtomType> types() const { return types_; }
  int maxValence() const { return max_valence_; }
  std::optional<int> indexOf(std::string_view symbol) const;

  // FNV-1a over the serialized form; stable across platforms.
  std::uint64_t fingerprint() const;
  // "C:4,N:3,O:2,F:1"
  std::string serialize() const;
  static AtomVocabulary deserialize(std::string_view text);

  bool operator==(const AtomVocabulary& other) const {
    return types_ == other.types_;
  }

 private:
  std::vector<AtomType> types_;
  int max_valence_ = 0;
};

enum class BondOrder : std::uint8_t { kSingle = 1, kDouble = 2, kTriple = 3 };

inline constexpr int kNumBondTypes = 3;

inline int orderValue(BondOrder order) { return static_cast<int>(order); }
// Index in [0, kNumBondTypes) used for one-hot encodings and per-type weights.
inline int bondTypeIndex(BondOrder order) { return orderValue(order) - 1; }
inline BondOrder bondOrderFromIndex(int index) {
  return static_cast<BondOrder>(index + 1);
}

struct Atom {
  int type = 0;
  int implicit_h = 0;
};

struct Bond {
  int u = 0;
  int v = 0;
  BondOrder order = BondOrder::kSingle;
};

struct Neighbor {
  int atom = 0;
  BondOrder order = BondOrder::kSingle;
};

// Heavy-atom graph with implicit hydrogen counts. Every mutation checks
// that no atom exceeds its valence, so a graph can never hold a negative
// remaining valence.
class MolecularGraph {
 public:
  MolecularGraph();
  explicit MolecularGraph(std::shared_ptr<const AtomVocabulary> vocab);

  int addAtom(int type, int implicit_h = 0);
  void addBond(int u, int v, BondOrder order);
  void setImplicitHydrogens(int atom, int count);

  int atomCount() const { return static_cast<int>(atoms_.size()); }
  int bondCount() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom& atom(int i) const;
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  std::span<const Neighbor> neighbors(int i) const;

  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  int bondOrderSum(int i) const;
  int valence(int i) const;
  std::optional<BondOrder> bondBetween(int u, int v) const;

  const AtomVocabulary& vocabulary() const { return *vocab_; }
  const std::shared_ptr<const AtomVocabulary>& sharedVocabulary() const {
    return vocab_;
  }

 private:
  void checkIndex(int i) const;

  std::shared_ptr<const AtomVocabulary> vocab_;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

// valence - incident bond orders - implicit hydrogens. Throws
// std::out_of_range for a bad index.
int remainingValence(const MolecularGraph& g, int atom);

// Raises every implicit hydrogen count until all atoms are saturated.
MolecularGraph completeWithHydrogens(const MolecularGraph& g);

// Restriction to atoms of degree >= 1; an all-isolated graph yields the
// empty graph. Relative atom order is preserved.
MolecularGraph removeIsolatedAtoms(const MolecularGraph& g);

// Restriction to the listed atoms, renumbered in the listed order.
MolecularGraph inducedSubgraph(const MolecularGraph& g,
                               std::span<const int> keep);

// Atom i of the input becomes atom perm[i] of the output.
MolecularGraph permuteAtoms(const MolecularGraph& g,
                            std::span<const int> perm);

bool isValenceValid(const MolecularGraph& g);
bool isConnected(const MolecularGraph& g);

// BFS hop distances from `source`; -1 marks unreachable atoms.
std::vector<int> bfsDistances(const MolecularGraph& g, int source);

}  // namespace ccgvae

#endif  // CCGVAE_CHEM_GRAPH_H_
