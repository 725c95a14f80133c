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

#ifndef CCGVAE_METRICS_H_
#define CCGVAE_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ccgvae/chem_graph.h"
#include "ccgvae/random.h"
#include "ccgvae/valence_histogram.h"

namespace ccgvae {

class Model;

inline constexpr int kFingerprintWidth = 2048;
inline constexpr int kFingerprintRadius = 2;

// Fixed-width bit vector.
class Fingerprint {
 public:
  explicit Fingerprint(int width = kFingerprintWidth);

  int width() const { return width_; }
  void set(int bit);
  bool test(int bit) const;
  int count() const;
  std::span<const std::uint64_t> words() const { return words_; }

  bool operator==(const Fingerprint&) const = default;

 private:
  int width_;
  std::vector<std::uint64_t> words_;
};

// Hashed rooted substructures of radius 0..radius. Atom identifiers start
// from (symbol, degree, implicit hydrogens) and are refined with the sorted
// (bond order, neighbour identifier) pairs; every identifier sets one bit.
Fingerprint fingerprint(const MolecularGraph& g, int width = kFingerprintWidth,
                        int radius = kFingerprintRadius);

// |a & b| / |a | b|, 1 when both are empty. Throws std::invalid_argument on
// a width mismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Non-empty, valence-valid and connected.
bool isValidMolecule(const MolecularGraph& g);

// A rate over Bernoulli trials, in percent, with the per-trial standard
// deviation 100 * sqrt(p (1 - p)).
struct Rate {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double percent() const;
  double stddev() const;
};

// Maps a test molecule to one decoded molecule.
using MoleculeDecoder =
    std::function<MolecularGraph(const MolecularGraph&, Rng&)>;
// Decides whether a decode reproduces its input.
using ReconstructionPredicate =
    std::function<bool(const MolecularGraph& input,
                       const MolecularGraph& decoded)>;

bool sameCanonicalForm(const MolecularGraph& input,
                       const MolecularGraph& decoded);

struct ReconstructionConfig {
  int encodings = 20;
  std::size_t molecule_cap = 5000;
};

struct ReconstructionReport {
  Rate rate;
  std::size_t molecules = 0;
  int encodings = 0;
  std::size_t skipped = 0;  // unparseable test records
};

// Decodes each of the first molecule_cap molecules `encodings` times.
ReconstructionReport reconstructionRate(
    std::span<const MolecularGraph> test, const MoleculeDecoder& decode,
    const ReconstructionConfig& cfg, Rng& rng,
    const ReconstructionPredicate& success = sameCanonicalForm);

// The model decoder: encode, one reparameterized draw, decode with the
// molecule's own histogram.
ReconstructionReport reconstructionRate(
    const Model& model, std::span<const MolecularGraph> test,
    const ReconstructionConfig& cfg, Rng& rng,
    const ReconstructionPredicate& success = sameCanonicalForm);

// Canonical forms and fingerprints of a training set.
class TrainingIndex {
 public:
  explicit TrainingIndex(std::span<const MolecularGraph> train,
                         int width = kFingerprintWidth);

  bool contains(const std::string& canonical) const {
    return canonical_.contains(canonical);
  }
  int width() const { return width_; }
  // Largest Tanimoto similarity to any training fingerprint; 0 for an
  // empty training set.
  double maxSimilarity(const Fingerprint& fp) const;

 private:
  int width_;
  std::unordered_set<std::string> canonical_;
  std::vector<Fingerprint> fingerprints_;
};

struct SampleReport {
  std::size_t samples = 0;
  std::size_t valid = 0;
  std::size_t novel = 0;
  std::size_t unique = 0;
  double validity = 0.0, validity_std = 0.0;
  double novelty = 0.0, novelty_std = 0.0;
  double uniqueness = 0.0, uniqueness_std = 0.0;
  double diversity = 0.0, diversity_std = 0.0;
  int fingerprint_width = kFingerprintWidth;
};

// Novelty, uniqueness and diversity are taken over the valid samples; all
// values are percentages.
SampleReport evaluateSamples(std::span<const MolecularGraph> samples,
                             const TrainingIndex& train);

// Decodes `samples` prior draws and evaluates them.
SampleReport generationReport(const Model& model,
                              const HistogramDistribution& dist,
                              const TrainingIndex& train, std::size_t samples,
                              Rng& rng);

struct EvaluationReport {
  std::optional<ReconstructionReport> reconstruction;
  std::optional<SampleReport> generation;
};

// key=value lines.
std::string formatReport(const EvaluationReport& report);
// Header and one row: %Rec. %Val. %Nov. %Uniq. %Div., "mean±std" cells,
// "-" for a missing protocol.
std::string formatTable(const EvaluationReport& report, char delimiter = '\t');

}  // namespace ccgvae

#endif  // CCGVAE_METRICS_H_
