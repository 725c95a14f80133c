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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace ccgvae {

namespace {

void requireSameNu(const ValenceHistogram& a, const ValenceHistogram& b) {
  if (a.nu() != b.nu()) {
    throw std::invalid_argument("histogram nu mismatch: " +
                                std::to_string(a.nu()) + " vs " +
                                std::to_string(b.nu()));
  }
}

template <typename T>
T parseNumber(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw HistogramError("bad " + std::string(what) + " '" +
                         std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> splitWhitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Exact integer weighted draw.
std::size_t drawWeighted(Rng& rng, const std::vector<std::uint64_t>& weights) {
  const std::uint64_t total =
      std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
  std::uint64_t target = uniformIndex(rng, total);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (target < weights[i]) return i;
    target -= weights[i];
  }
  return weights.size() - 1;
}

}  // namespace

ValenceHistogram::ValenceHistogram(int nu) {
  if (nu < 1) throw std::invalid_argument("histogram nu must be >= 1");
  counts_.assign(nu, 0);
}

ValenceHistogram::ValenceHistogram(std::vector<int> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw std::invalid_argument("histogram nu must be >= 1");
  for (const int c : counts_) {
    if (c < 0) throw HistogramError("negative histogram bucket");
  }
}

ValenceHistogram ValenceHistogram::of(
    int nu, std::initializer_list<std::pair<int, int>> items) {
  ValenceHistogram h(nu);
  for (const auto& [valence, count] : items) {
    if (valence < 1 || valence > nu) {
      throw std::out_of_range("valence " + std::to_string(valence) +
                              " outside 1.." + std::to_string(nu));
    }
    if (count < 0) throw HistogramError("negative histogram bucket");
    h.counts_[valence - 1] += count;
  }
  return h;
}

int ValenceHistogram::operator[](int valence) const {
  if (valence < 1 || valence > nu()) {
    throw std::out_of_range("valence " + std::to_string(valence) +
                            " outside 1.." + std::to_string(nu()));
  }
  return counts_[valence - 1];
}

int ValenceHistogram::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0);
}

std::string ValenceHistogram::toString() const {
  std::string out = "{";
  bool first = true;
  for (int i = 0; i < nu(); ++i) {
    if (counts_[i] == 0) continue;
    if (!first) out += ',';
    out += std::to_string(i + 1) + ':' + std::to_string(counts_[i]);
    first = false;
  }
  return out + '}';
}

bool isCompatible(const ValenceHistogram& a, const ValenceHistogram& b) {
  requireSameNu(a, b);
  for (int v = 1; v <= a.nu(); ++v) {
    if (b[v] < a[v]) return false;
  }
  return true;
}

ValenceHistogram subtract(const ValenceHistogram& total,
                          const ValenceHistogram& used) {
  requireSameNu(total, used);
  if (!isCompatible(used, total)) {
    throw HistogramError("cannot subtract " + used.toString() + " from " +
                         total.toString() + ": bucket would go negative");
  }
  ValenceHistogram out = total;
  for (int i = 0; i < out.nu(); ++i) out.counts_[i] -= used.counts_[i];
  return out;
}

ValenceHistogram updateWithValence(const ValenceHistogram& used,
                                   int valence) {
  if (valence < 1 || valence > used.nu()) {
    throw HistogramError("valence " + std::to_string(valence) +
                         " outside 1.." + std::to_string(used.nu()));
  }
  ValenceHistogram out = used;
  ++out.counts_[valence - 1];
  return out;
}

ValenceHistogram histogramOfValences(const MolecularGraph& g,
                                     bool include_hydrogens) {
  std::vector<int> counts(g.vocabulary().maxValence(), 0);
  for (int a = 0; a < g.atomCount(); ++a) {
    ++counts[g.valence(a) - 1];
    if (include_hydrogens) counts[0] += g.atom(a).implicit_h;
  }
  return ValenceHistogram(std::move(counts));
}

HistogramDistribution::HistogramDistribution(
    int nu, std::vector<HistogramEntry> entries)
    : nu_(nu), entries_(std::move(entries)) {
  if (nu_ < 1) throw std::invalid_argument("distribution nu must be >= 1");
  std::sort(entries_.begin(), entries_.end(),
            [](const HistogramEntry& a, const HistogramEntry& b) {
              return a.histogram < b.histogram;
            });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.histogram.nu() != nu_) {
      throw HistogramError("entry nu differs from distribution nu");
    }
    if (e.weight == 0) throw HistogramError("entry weights must be positive");
    if (i > 0 && entries_[i - 1].histogram == e.histogram) {
      throw HistogramError("duplicate histogram " + e.histogram.toString());
    }
    total_ += e.weight;
  }
}

HistogramDistribution HistogramDistribution::build(
    std::span<const MolecularGraph> corpus) {
  if (corpus.empty()) {
    throw HistogramError("cannot build a histogram distribution from an "
                         "empty corpus");
  }
  const int nu = corpus.front().vocabulary().maxValence();
  std::map<ValenceHistogram, std::uint64_t> counts;
  for (const auto& g : corpus) {
    if (g.vocabulary().maxValence() != nu) {
      throw HistogramError("corpus mixes vocabularies with different nu");
    }
    ++counts[histogramOfValences(g, /*include_hydrogens=*/false)];
  }
  std::vector<HistogramEntry> entries;
  entries.reserve(counts.size());
  for (auto& [h, w] : counts) entries.push_back({h, w});
  return HistogramDistribution(nu, std::move(entries));
}

std::string HistogramDistribution::serialize() const {
  std::string out = "nu=" + std::to_string(nu_) + '\n';
  for (const auto& e : entries_) {
    for (int i = 0; i < nu_; ++i) {
      if (i) out += ' ';
      out += std::to_string(e.histogram.counts()[i]);
    }
    out += '\t' + std::to_string(e.weight) + '\n';
  }
  return out;
}

HistogramDistribution HistogramDistribution::parse(std::string_view text) {
  int nu = -1;
  std::vector<HistogramEntry> entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (nu < 0) {
      if (line.substr(0, 3) != "nu=") {
        throw HistogramError("histogram file must start with 'nu=<nu>'");
      }
      nu = parseNumber<int>(line.substr(3), "nu");
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw HistogramError("line " + std::to_string(line_no) +
                           ": expected '<counts><TAB><weight>'");
    }
    const auto fields = splitWhitespace(line.substr(0, tab));
    if (static_cast<int>(fields.size()) != nu) {
      throw HistogramError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(nu) + " counts");
    }
    std::vector<int> counts;
    for (const auto f : fields) counts.push_back(parseNumber<int>(f, "count"));
    entries.push_back(
        {ValenceHistogram(std::move(counts)),
         parseNumber<std::uint64_t>(line.substr(tab + 1), "weight")});
  }
  if (nu < 0) throw HistogramError("empty histogram file");
  return HistogramDistribution(nu, std::move(entries));
}

void HistogramDistribution::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  out << serialize();
  if (!out) throw std::runtime_error("cannot write " + path);
}

HistogramDistribution HistogramDistribution::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open histogram file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

HistogramSample sampleCompatible(const HistogramDistribution& dist,
                                 const ValenceHistogram& used, int min_atoms,
                                 Rng& rng) {
  if (dist.size() == 0) throw HistogramError("empty histogram distribution");
  if (min_atoms < 1) throw std::invalid_argument("min_atoms must be >= 1");
  const auto entries = dist.entries();
  std::vector<std::uint64_t> weights(entries.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.histogram.total() >= min_atoms && isCompatible(used, e.histogram)) {
      weights[i] = e.weight;
      any = true;
    }
  }
  if (any) {
    return {entries[drawWeighted(rng, weights)].histogram,
            false};
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    weights[i] = entries[i].weight;
  }
  return {entries[drawWeighted(rng, weights)].histogram,
          true};
}

InitialHistogram sampleInitial(const HistogramDistribution& dist, Rng& rng) {
  if (dist.size() == 0) throw HistogramError("empty histogram distribution");
  std::vector<std::uint64_t> weights;
  weights.reserve(dist.size());
  for (const auto& e : dist.entries()) weights.push_back(e.weight);
  const auto& h =
      dist.entries()[drawWeighted(rng, weights)].histogram;
  return {h, h.total()};
}

}  // namespace ccgvae
