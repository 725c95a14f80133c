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
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "ccgvae/canonical.h"
#include "ccgvae/decoder.h"
#include "ccgvae/encoder.h"
#include "ccgvae/model.h"

namespace ccgvae {

Fingerprint::Fingerprint(int width) : width_(width) {
  if (width < 1) throw std::invalid_argument("fingerprint width must be >= 1");
  words_.assign((width + 63) / 64, 0);
}

void Fingerprint::set(int bit) {
  if (bit < 0 || bit >= width_) throw std::out_of_range("fingerprint bit");
  words_[bit / 64] |= std::uint64_t{1} << (bit % 64);
}

bool Fingerprint::test(int bit) const {
  if (bit < 0 || bit >= width_) throw std::out_of_range("fingerprint bit");
  return (words_[bit / 64] >> (bit % 64)) & 1;
}

int Fingerprint::count() const {
  int n = 0;
  for (const std::uint64_t w : words_) n += std::popcount(w);
  return n;
}

namespace {

// splitmix64 finalizer; fixed so fingerprints agree across platforms.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
  return mix(seed ^ mix(value));
}

std::uint64_t hashString(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

Fingerprint fingerprint(const MolecularGraph& g, int width, int radius) {
  if (radius < 0) throw std::invalid_argument("fingerprint radius must be >= 0");
  Fingerprint fp(width);
  const int m = g.atomCount();
  std::vector<std::uint64_t> id(m);
  for (int v = 0; v < m; ++v) {
    const Atom& a = g.atom(v);
    std::uint64_t h = hashString(g.vocabulary()[a.type].symbol);
    h = combine(h, static_cast<std::uint64_t>(g.degree(v)));
    h = combine(h, static_cast<std::uint64_t>(a.implicit_h));
    id[v] = h;
  }
  const auto mark = [&] {
    for (const std::uint64_t h : id) fp.set(static_cast<int>(h % width));
  };
  mark();
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(m);
    for (int v = 0; v < m; ++v) {
      std::vector<std::pair<int, std::uint64_t>> env;
      for (const auto& nb : g.neighbors(v)) {
        env.push_back({orderValue(nb.order), id[nb.atom]});
      }
      std::sort(env.begin(), env.end());
      std::uint64_t h = combine(id[v], static_cast<std::uint64_t>(r));
      for (const auto& [order, other] : env) {
        h = combine(combine(h, static_cast<std::uint64_t>(order)), other);
      }
      next[v] = h;
    }
    id = std::move(next);
    mark();
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width()) {
    throw std::invalid_argument("tanimoto of fingerprints of different widths");
  }
  int both = 0, either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / either;
}

bool isValidMolecule(const MolecularGraph& g) {
  return !g.empty() && isValenceValid(g) && isConnected(g);
}

double Rate::percent() const {
  return trials == 0 ? 0.0 : 100.0 * static_cast<double>(successes) / trials;
}

double Rate::stddev() const {
  if (trials == 0) return 0.0;
  const double p = static_cast<double>(successes) / trials;
  return 100.0 * std::sqrt(p * (1.0 - p));
}

bool sameCanonicalForm(const MolecularGraph& input,
                       const MolecularGraph& decoded) {
  return canonicalForm(input) == canonicalForm(decoded);
}

ReconstructionReport reconstructionRate(std::span<const MolecularGraph> test,
                                        const MoleculeDecoder& decode,
                                        const ReconstructionConfig& cfg,
                                        Rng& rng,
                                        const ReconstructionPredicate& success) {
  if (cfg.encodings < 1) throw std::invalid_argument("encodings must be >= 1");
  ReconstructionReport report;
  report.encodings = cfg.encodings;
  report.molecules = std::min(test.size(), cfg.molecule_cap);
  for (std::size_t i = 0; i < report.molecules; ++i) {
    for (int k = 0; k < cfg.encodings; ++k) {
      report.rate.successes += success(test[i], decode(test[i], rng));
      ++report.rate.trials;
    }
  }
  return report;
}

ReconstructionReport reconstructionRate(const Model& model,
                                        std::span<const MolecularGraph> test,
                                        const ReconstructionConfig& cfg,
                                        Rng& rng,
                                        const ReconstructionPredicate& success) {
  if (cfg.encodings < 1) throw std::invalid_argument("encodings must be >= 1");
  ReconstructionReport report;
  report.encodings = cfg.encodings;
  report.molecules = std::min(test.size(), cfg.molecule_cap);
  for (std::size_t i = 0; i < report.molecules; ++i) {
    const MolecularGraph& g = test[i];
    Tape tape(/*grad_enabled=*/false);
    const LatentEncoding enc = encode(tape, model, g);
    const ValenceHistogram alpha0 = histogramOfValences(g, false);
    for (int k = 0; k < cfg.encodings; ++k) {
      const Tensor z = reparameterize(tape, enc, rng).value();
      const DecodeOutput out = decodeLatent(model, z, alpha0, nullptr,
                                            DecodeMode::kReconstruction, rng);
      report.rate.successes += success(g, out.molecule);
      ++report.rate.trials;
    }
  }
  return report;
}

TrainingIndex::TrainingIndex(std::span<const MolecularGraph> train, int width)
    : width_(width) {
  for (const auto& g : train) {
    canonical_.insert(canonicalForm(g));
    fingerprints_.push_back(fingerprint(g, width));
  }
}

double TrainingIndex::maxSimilarity(const Fingerprint& fp) const {
  double best = 0.0;
  for (const auto& t : fingerprints_) best = std::max(best, tanimoto(fp, t));
  return best;
}

SampleReport evaluateSamples(std::span<const MolecularGraph> samples,
                             const TrainingIndex& train) {
  SampleReport r;
  r.samples = samples.size();
  r.fingerprint_width = train.width();
  std::unordered_set<std::string> seen;
  std::vector<double> dissimilarity;
  for (const auto& g : samples) {
    if (!isValidMolecule(g)) continue;
    ++r.valid;
    const std::string form = canonicalForm(g);
    r.novel += !train.contains(form);
    r.unique += seen.insert(form).second;
    dissimilarity.push_back(
        100.0 * (1.0 - train.maxSimilarity(fingerprint(g, train.width()))));
  }
  const Rate validity{r.valid, r.samples};
  const Rate novelty{r.novel, r.valid};
  const Rate uniqueness{r.unique, r.valid};
  r.validity = validity.percent();
  r.validity_std = validity.stddev();
  r.novelty = novelty.percent();
  r.novelty_std = novelty.stddev();
  r.uniqueness = uniqueness.percent();
  r.uniqueness_std = uniqueness.stddev();
  if (!dissimilarity.empty()) {
    double sum = 0.0, sq = 0.0;
    for (const double d : dissimilarity) {
      sum += d;
      sq += d * d;
    }
    const double n = static_cast<double>(dissimilarity.size());
    r.diversity = sum / n;
    r.diversity_std = std::sqrt(std::max(0.0, sq / n - r.diversity * r.diversity));
  }
  return r;
}

SampleReport generationReport(const Model& model,
                              const HistogramDistribution& dist,
                              const TrainingIndex& train, std::size_t samples,
                              Rng& rng) {
  std::vector<MolecularGraph> out;
  out.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    out.push_back(generateMolecule(model, dist, rng).molecule);
  }
  return evaluateSamples(out, train);
}

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string cell(double mean, double stddev) {
  return number(mean) + "±" + number(stddev);
}

}  // namespace

std::string formatReport(const EvaluationReport& report) {
  std::ostringstream os;
  if (const auto& rec = report.reconstruction) {
    os << "reconstruction=" << number(rec->rate.percent()) << "\n"
       << "reconstruction_std=" << number(rec->rate.stddev()) << "\n"
       << "reconstruction_molecules=" << rec->molecules << "\n"
       << "reconstruction_encodings=" << rec->encodings << "\n"
       << "reconstruction_trials=" << rec->rate.trials << "\n"
       << "reconstruction_successes=" << rec->rate.successes << "\n"
       << "reconstruction_skipped=" << rec->skipped << "\n";
  }
  if (const auto& gen = report.generation) {
    os << "samples=" << gen->samples << "\n"
       << "valid=" << gen->valid << "\n"
       << "novel=" << gen->novel << "\n"
       << "unique=" << gen->unique << "\n"
       << "validity=" << number(gen->validity) << "\n"
       << "validity_std=" << number(gen->validity_std) << "\n"
       << "novelty=" << number(gen->novelty) << "\n"
       << "novelty_std=" << number(gen->novelty_std) << "\n"
       << "uniqueness=" << number(gen->uniqueness) << "\n"
       << "uniqueness_std=" << number(gen->uniqueness_std) << "\n"
       << "diversity=" << number(gen->diversity) << "\n"
       << "diversity_std=" << number(gen->diversity_std) << "\n"
       << "fingerprint_width=" << gen->fingerprint_width << "\n";
  }
  return os.str();
}

std::string formatTable(const EvaluationReport& report, char delimiter) {
  std::vector<std::string> row;
  const auto& rec = report.reconstruction;
  const auto& gen = report.generation;
  row.push_back(rec ? cell(rec->rate.percent(), rec->rate.stddev()) : "-");
  row.push_back(gen ? cell(gen->validity, gen->validity_std) : "-");
  row.push_back(gen ? cell(gen->novelty, gen->novelty_std) : "-");
  row.push_back(gen ? cell(gen->uniqueness, gen->uniqueness_std) : "-");
  row.push_back(gen ? cell(gen->diversity, gen->diversity_std) : "-");
  std::string out = "%Rec.";
  for (const char* h : {"%Val.", "%Nov.", "%Uniq.", "%Div."}) {
    out += delimiter;
    out += h;
  }
  out += "\n";
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out += delimiter;
    out += row[i];
  }
  return out + "\n";
}

}  // namespace ccgvae
