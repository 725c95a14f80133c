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

#ifndef CCGVAE_CANONICAL_H_
#define CCGVAE_CANONICAL_H_

#include <string>
#include <vector>

#include "ccgvae/chem_graph.h"

namespace ccgvae {

// Canonical atom order: result[k] is the input atom placed at position k.
// Computed by iterated neighborhood refinement followed by exhaustive
// individualization of the remaining tied classes; the lexicographically
// smallest encoding over all leaves wins, so the order is exact (not
// hash-based) up to automorphism.
std::vector<int> canonicalOrder(const MolecularGraph& g);

// Permutation-invariant identifier: isomorphic graphs (atom types, implicit
// hydrogens, bond orders) map to the same string and non-isomorphic graphs
// to different strings. Ethanol, for example, is "C2.C3.O1|0-1:1,0-2:1".
std::string canonicalForm(const MolecularGraph& g);

bool isomorphic(const MolecularGraph& a, const MolecularGraph& b);

}  // namespace ccgvae

#endif  // CCGVAE_CANONICAL_H_
