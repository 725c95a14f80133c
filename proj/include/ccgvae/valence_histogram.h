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

#ifndef CCGVAE_VALENCE_HISTOGRAM_H_
#define CCGVAE_VALENCE_HISTOGRAM_H_

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccgvae/chem_graph.h"
#include "ccgvae/random.h"

namespace ccgvae {

class HistogramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Atom counts per valence 1..nu.
class ValenceHistogram {
 public:
  ValenceHistogram() = default;
  explicit ValenceHistogram(int nu);
  explicit ValenceHistogram(std::vector<int> counts);
  // Sparse literal: ValenceHistogram::of(4, {{1, 4}, {4, 1}}).
  static ValenceHistogram of(int nu,
                             std::initializer_list<std::pair<int, int>> items);

  int nu() const { return static_cast<int>(counts_.size()); }
  // 1-based valence; throws std::out_of_range.
  int operator[](int valence) const;
  int total() const;
  bool isZero() const { return total() == 0; }
  std::span<const int> counts() const { return counts_; }

  std::string toString() const;  // "{1:4,4:1}"

  auto operator<=>(const ValenceHistogram&) const = default;
  bool operator==(const ValenceHistogram&) const = default;

 private:
  friend ValenceHistogram subtract(const ValenceHistogram&,
                                   const ValenceHistogram&);
  friend ValenceHistogram updateWithValence(const ValenceHistogram&, int);

  std::vector<int> counts_;
};

// True iff `b` dominates `a` bucket-wise ("a is compatible with b").
// Throws std::invalid_argument on mismatched nu.
bool isCompatible(const ValenceHistogram& a, const ValenceHistogram& b);

// Bucket-wise total - used. Throws HistogramError if any bucket would go
// negative.
ValenceHistogram subtract(const ValenceHistogram& total,
                          const ValenceHistogram& used);

// `used` with bucket `valence` incremented. Throws HistogramError if the
// valence is outside 1..nu.
ValenceHistogram updateWithValence(const ValenceHistogram& used, int valence);

// Histogram over heavy atoms with nu = vocabulary max valence; implicit
// hydrogens land in bucket 1 when requested.
ValenceHistogram histogramOfValences(const MolecularGraph& g,
                                     bool include_hydrogens);

struct HistogramEntry {
  ValenceHistogram histogram;
  std::uint64_t weight = 0;
};

// Empirical distribution over the distinct histograms of a corpus. Entries
// are kept in lexicographic order of their counts.
class HistogramDistribution {
 public:
  HistogramDistribution(int nu, std::vector<HistogramEntry> entries);

  // Heavy-atom histograms of every molecule; throws on an empty corpus.
  static HistogramDistribution build(std::span<const MolecularGraph> corpus);

  int nu() const { return nu_; }
  std::span<const HistogramEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t totalWeight() const { return total_; }

  // Header `nu=<nu>`, then `c_1 ... c_nu<TAB>weight` per entry.
  std::string serialize() const;
  static HistogramDistribution parse(std::string_view text);
  void save(const std::string& path) const;
  static HistogramDistribution load(const std::string& path);

 private:
  int nu_ = 0;
  std::vector<HistogramEntry> entries_;
  std::uint64_t total_ = 0;
};

struct HistogramSample {
  ValenceHistogram histogram;
  // Set when no entry was compatible with `used` and the draw fell back to
  // the unrestricted distribution.
  bool fallback = false;
};

// Weighted draw among entries e with isCompatible(used, e) and
// e.total() >= min_atoms; unrestricted weighted draw if none qualifies.
HistogramSample sampleCompatible(const HistogramDistribution& dist,
                                 const ValenceHistogram& used, int min_atoms,
                                 Rng& rng);

struct InitialHistogram {
  ValenceHistogram histogram;
  int atoms = 0;  // always histogram.total()
};

InitialHistogram sampleInitial(const HistogramDistribution& dist, Rng& rng);

}  // namespace ccgvae

#endif  // CCGVAE_VALENCE_HISTOGRAM_H_
