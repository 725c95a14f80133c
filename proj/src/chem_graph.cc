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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace ccgvae {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

int parseValence(std::string_view text, std::string_view context) {
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("bad valence '" + std::string(text) +
                                "' in " + std::string(context));
  }
  return value;
}

const std::shared_ptr<const AtomVocabulary>& defaultVocabulary() {
  static const auto vocab =
      std::make_shared<const AtomVocabulary>(AtomVocabulary::qm9());
  return vocab;
}

}  // namespace

AtomVocabulary::AtomVocabulary(std::vector<AtomType> types)
    : types_(std::move(types)) {
  if (types_.empty()) throw std::invalid_argument("empty atom vocabulary");
  std::set<std::string> seen;
  for (const auto& t : types_) {
    if (t.symbol.empty()) throw std::invalid_argument("empty atom symbol");
    if (t.valence < 1) {
      throw std::invalid_argument("valence of " + t.symbol + " must be >= 1");
    }
    if (!seen.insert(t.symbol).second) {
      throw std::invalid_argument("duplicate atom symbol " + t.symbol);
    }
    max_valence_ = std::max(max_valence_, t.valence);
  }
}

AtomVocabulary AtomVocabulary::qm9() {
  return AtomVocabulary({{"C", 4}, {"N", 3}, {"O", 2}, {"F", 1}});
}

AtomVocabulary AtomVocabulary::parse(std::string_view text) {
  std::vector<AtomType> types;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto split = body.find_first_of(" \t");
    if (split == std::string_view::npos) {
      throw std::invalid_argument("vocabulary line needs 'symbol valence': " +
                                  line);
    }
    types.push_back({std::string(body.substr(0, split)),
                     parseValence(trim(body.substr(split)), line)});
  }
  return AtomVocabulary(std::move(types));
}

AtomVocabulary AtomVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<int> AtomVocabulary::indexOf(std::string_view symbol) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i].symbol == symbol) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string AtomVocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (i) out += ',';
    out += types_[i].symbol + ':' + std::to_string(types_[i].valence);
  }
  return out;
}

AtomVocabulary AtomVocabulary::deserialize(std::string_view text) {
  std::vector<AtomType> types;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw std::invalid_argument("bad vocabulary entry " + std::string(item));
    }
    types.push_back({std::string(item.substr(0, colon)),
                     parseValence(item.substr(colon + 1), item)});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return AtomVocabulary(std::move(types));
}

std::uint64_t AtomVocabulary::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

MolecularGraph::MolecularGraph() : vocab_(defaultVocabulary()) {}

MolecularGraph::MolecularGraph(std::shared_ptr<const AtomVocabulary> vocab)
    : vocab_(std::move(vocab)) {
  if (!vocab_) throw std::invalid_argument("null vocabulary");
}

void MolecularGraph::checkIndex(int i) const {
  if (i < 0 || i >= atomCount()) {
    throw std::out_of_range("atom index " + std::to_string(i) +
                            " out of range (" + std::to_string(atomCount()) +
                            " atoms)");
  }
}

int MolecularGraph::addAtom(int type, int implicit_h) {
  if (type < 0 || type >= static_cast<int>(vocab_->size())) {
    throw std::out_of_range("atom type " + std::to_string(type) +
                            " not in vocabulary");
  }
  if (implicit_h < 0 || implicit_h > (*vocab_)[type].valence) {
    throw GraphError("implicit hydrogen count " + std::to_string(implicit_h) +
                     " exceeds valence of " + (*vocab_)[type].symbol);
  }
  atoms_.push_back({type, implicit_h});
  adjacency_.emplace_back();
  return atomCount() - 1;
}

void MolecularGraph::addBond(int u, int v, BondOrder order) {
  checkIndex(u);
  checkIndex(v);
  if (u == v) throw GraphError("self loop on atom " + std::to_string(u));
  if (bondBetween(u, v)) {
    throw GraphError("parallel bond " + std::to_string(u) + "-" +
                     std::to_string(v));
  }
  const int k = orderValue(order);
  if (remainingValence(*this, u) < k || remainingValence(*this, v) < k) {
    throw GraphError("bond " + std::to_string(u) + "-" + std::to_string(v) +
                     " of order " + std::to_string(k) + " exceeds valence");
  }
  bonds_.push_back({u, v, order});
  adjacency_[u].push_back({v, order});
  adjacency_[v].push_back({u, order});
}

void MolecularGraph::setImplicitHydrogens(int atom, int count) {
  checkIndex(atom);
  if (count < 0 || bondOrderSum(atom) + count > valence(atom)) {
    throw GraphError("implicit hydrogen count " + std::to_string(count) +
                     " invalid for atom " + std::to_string(atom));
  }
  atoms_[atom].implicit_h = count;
}

const Atom& MolecularGraph::atom(int i) const {
  checkIndex(i);
  return atoms_[i];
}

std::span<const Neighbor> MolecularGraph::neighbors(int i) const {
  checkIndex(i);
  return adjacency_[i];
}

int MolecularGraph::bondOrderSum(int i) const {
  int sum = 0;
  for (const auto& n : neighbors(i)) sum += orderValue(n.order);
  return sum;
}

int MolecularGraph::valence(int i) const {
  return (*vocab_)[atom(i).type].valence;
}

std::optional<BondOrder> MolecularGraph::bondBetween(int u, int v) const {
  for (const auto& n : neighbors(u)) {
    if (n.atom == v) return n.order;
  }
  return std::nullopt;
}

int remainingValence(const MolecularGraph& g, int atom) {
  return g.valence(atom) - g.bondOrderSum(atom) - g.atom(atom).implicit_h;
}

MolecularGraph completeWithHydrogens(const MolecularGraph& g) {
  MolecularGraph out = g;
  for (int i = 0; i < out.atomCount(); ++i) {
    out.setImplicitHydrogens(i, out.valence(i) - out.bondOrderSum(i));
  }
  return out;
}

MolecularGraph inducedSubgraph(const MolecularGraph& g,
                               std::span<const int> keep) {
  std::vector<int> remap(g.atomCount(), -1);
  MolecularGraph out(g.sharedVocabulary());
  for (const int a : keep) {
    if (remap.at(a) != -1) throw std::invalid_argument("duplicate atom index");
    remap[a] = out.addAtom(g.atom(a).type, g.atom(a).implicit_h);
  }
  for (const auto& b : g.bonds()) {
    if (remap[b.u] >= 0 && remap[b.v] >= 0) {
      out.addBond(remap[b.u], remap[b.v], b.order);
    }
  }
  return out;
}

MolecularGraph removeIsolatedAtoms(const MolecularGraph& g) {
  std::vector<int> keep;
  for (int i = 0; i < g.atomCount(); ++i) {
    if (g.degree(i) > 0) keep.push_back(i);
  }
  return inducedSubgraph(g, keep);
}

MolecularGraph permuteAtoms(const MolecularGraph& g,
                            std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != g.atomCount()) {
    throw std::invalid_argument("permutation size mismatch");
  }
  std::vector<int> order(perm.size(), -1);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] < 0 || perm[i] >= g.atomCount() || order[perm[i]] != -1) {
      throw std::invalid_argument("not a permutation");
    }
    order[perm[i]] = static_cast<int>(i);
  }
  MolecularGraph out(g.sharedVocabulary());
  for (const int src : order) out.addAtom(g.atom(src).type, 0);
  for (const auto& b : g.bonds()) out.addBond(perm[b.u], perm[b.v], b.order);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.setImplicitHydrogens(perm[i], g.atom(static_cast<int>(i)).implicit_h);
  }
  return out;
}

bool isValenceValid(const MolecularGraph& g) {
  for (int i = 0; i < g.atomCount(); ++i) {
    if (remainingValence(g, i) != 0) return false;
  }
  return true;
}

std::vector<int> bfsDistances(const MolecularGraph& g, int source) {
  std::vector<int> dist(g.atomCount(), -1);
  std::queue<int> frontier;
  dist.at(source) = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int a = frontier.front();
    frontier.pop();
    for (const auto& n : g.neighbors(a)) {
      if (dist[n.atom] < 0) {
        dist[n.atom] = dist[a] + 1;
        frontier.push(n.atom);
      }
    }
  }
  return dist;
}

bool isConnected(const MolecularGraph& g) {
  if (g.empty()) return false;
  const auto dist = bfsDistances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

}  // namespace ccgvae
