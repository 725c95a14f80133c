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

#include "ccgvae/canonical.h"

#include <algorithm>
#include <array>
#include <numeric>
#include <tuple>

namespace ccgvae {

namespace {

// Ranks are "number of atoms with a strictly smaller label", so an atom's
// rank doubles as the start position of its cell in the final order.
using Ranks = std::vector<int>;

template <typename Key>
Ranks ranksFromKeys(const std::vector<Key>& keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  Ranks ranks(n);
  for (int i = 0; i < n; ++i) {
    ranks[idx[i]] = (i > 0 && keys[idx[i]] == keys[idx[i - 1]])
                        ? ranks[idx[i - 1]]
                        : i;
  }
  return ranks;
}

int distinctCount(const Ranks& ranks) {
  Ranks sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) -
                          sorted.begin());
}

Ranks refine(const MolecularGraph& g, Ranks ranks) {
  const int n = g.atomCount();
  int cells = distinctCount(ranks);
  while (cells < n) {
    std::vector<std::vector<int>> keys(n);
    for (int a = 0; a < n; ++a) {
      std::vector<int> nbr;
      for (const auto& nb : g.neighbors(a)) {
        nbr.push_back(ranks[nb.atom] * 4 + orderValue(nb.order));
      }
      std::sort(nbr.begin(), nbr.end());
      keys[a].reserve(nbr.size() + 1);
      keys[a].push_back(ranks[a]);
      keys[a].insert(keys[a].end(), nbr.begin(), nbr.end());
    }
    Ranks next = ranksFromKeys(keys);
    const int next_cells = distinctCount(next);
    ranks = std::move(next);
    if (next_cells == cells) break;
    cells = next_cells;
  }
  return ranks;
}

std::vector<int> encode(const MolecularGraph& g, const Ranks& ranks) {
  const int n = g.atomCount();
  std::vector<int> code(2 * n);
  for (int a = 0; a < n; ++a) {
    code[2 * ranks[a]] = g.atom(a).type;
    code[2 * ranks[a] + 1] = g.atom(a).implicit_h;
  }
  std::vector<std::tuple<int, int, int>> edges;
  for (const auto& b : g.bonds()) {
    const int x = ranks[b.u];
    const int y = ranks[b.v];
    edges.emplace_back(std::min(x, y), std::max(x, y), orderValue(b.order));
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& [x, y, o] : edges) {
    code.push_back(x);
    code.push_back(y);
    code.push_back(o);
  }
  return code;
}

struct Search {
  const MolecularGraph& g;
  std::vector<int> best_code;
  Ranks best_ranks;

  void run(Ranks ranks) {
    ranks = refine(g, std::move(ranks));
    const int n = g.atomCount();
    // First non-singleton cell by rank.
    std::vector<int> count(n, 0);
    for (const int r : ranks) ++count[r];
    int target = -1;
    for (int r = 0; r < n; ++r) {
      if (count[r] > 1) {
        target = r;
        break;
      }
    }
    if (target < 0) {
      auto code = encode(g, ranks);
      if (best_ranks.empty() || code < best_code) {
        best_code = std::move(code);
        best_ranks = std::move(ranks);
      }
      return;
    }
    for (int a = 0; a < n; ++a) {
      if (ranks[a] != target) continue;
      Ranks branch = ranks;
      for (int b = 0; b < n; ++b) {
        if (b != a && ranks[b] == target) branch[b] = target + 1;
      }
      run(std::move(branch));
    }
  }
};

}  // namespace

std::vector<int> canonicalOrder(const MolecularGraph& g) {
  const int n = g.atomCount();
  if (n == 0) return {};
  std::vector<std::array<int, 4>> initial(n);
  for (int a = 0; a < n; ++a) {
    initial[a] = {g.atom(a).type, g.atom(a).implicit_h, g.degree(a),
                  g.bondOrderSum(a)};
  }
  Search search{g, {}, {}};
  search.run(ranksFromKeys(initial));
  std::vector<int> order(n);
  for (int a = 0; a < n; ++a) order[search.best_ranks[a]] = a;
  return order;
}

std::string canonicalForm(const MolecularGraph& g) {
  const auto order = canonicalOrder(g);
  std::vector<int> position(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;

  std::string out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) out += '.';
    const auto& atom = g.atom(order[k]);
    out += g.vocabulary()[atom.type].symbol;
    out += std::to_string(atom.implicit_h);
  }
  out += '|';
  std::vector<std::tuple<int, int, int>> edges;
  for (const auto& b : g.bonds()) {
    const int x = position[b.u];
    const int y = position[b.v];
    edges.emplace_back(std::min(x, y), std::max(x, y), orderValue(b.order));
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& [x, y, o] = edges[i];
    if (i) out += ',';
    out += std::to_string(x) + '-' + std::to_string(y) + ':' +
           std::to_string(o);
  }
  return out;
}

bool isomorphic(const MolecularGraph& a, const MolecularGraph& b) {
  return a.vocabulary() == b.vocabulary() &&
         canonicalForm(a) == canonicalForm(b);
}

}  // namespace ccgvae
