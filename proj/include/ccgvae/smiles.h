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

#ifndef CCGVAE_SMILES_H_
#define CCGVAE_SMILES_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccgvae/chem_graph.h"

namespace ccgvae {

class SmilesError : public std::runtime_error {
 public:
  enum class Kind {
    kSyntax,
    kUnknownElement,
    kUnpairedRingClosure,
    kValence,
    kKekulization,
    kUnsupported,
  };

  // `position` is 1-based; 0 means "whole string".
  SmilesError(Kind kind, std::size_t position, const std::string& message);

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

const char* toString(SmilesError::Kind kind);

struct SmilesToken {
  enum class Kind { kAtom, kBond, kBranchOpen, kBranchClose, kRingBond, kDot };

  Kind kind = Kind::kAtom;
  std::size_t position = 0;  // 1-based offset of the first character
  // kAtom
  std::string symbol;  // as written, e.g. "Cl", "c", "n"
  bool aromatic = false;
  bool bracket = false;
  int hydrogens = 0;  // explicit count inside brackets
  // kBond: 1..3, or 0 for ':' (aromatic)
  int order = 0;
  // kRingBond
  int ring = 0;
};

// Lexical pass. Throws SmilesError for characters outside the supported
// subset (charges, isotopes, stereo marks raise kUnsupported).
std::vector<SmilesToken> tokenizeSmiles(std::string_view smiles);

// Parses the organic subset plus bracket atoms with explicit hydrogen
// counts, bonds - = # :, branches, ring closures 0-9 and %nn and '.'
// separators. Aromatic atoms are kekulized. Bare atoms receive implicit
// hydrogens up to their vocabulary valence; the result is valence-valid.
MolecularGraph parseSmiles(std::string_view smiles,
                           std::shared_ptr<const AtomVocabulary> vocab);

// Canonical SMILES (Kekulé form) for a connected, valence-valid graph.
// Throws std::invalid_argument otherwise.
std::string writeSmiles(const MolecularGraph& g);

struct DatasetRecord {
  std::string smiles;
  std::optional<double> property;
  std::string property_error;  // non-empty when the column is not a number
  std::size_t line = 0;
};

// `SMILES<TAB>property` per line, property optional; '#' lines and blank
// lines skipped. Throws std::runtime_error if the file cannot be read.
std::vector<DatasetRecord> readDatasetRecords(const std::string& path);
std::vector<DatasetRecord> parseDatasetRecords(std::string_view text);

struct ParseFailure {
  std::size_t line = 0;
  std::string smiles;
  std::string message;
};

struct Dataset {
  std::vector<MolecularGraph> graphs;
  std::vector<std::string> smiles;
  std::vector<std::optional<double>> properties;
  std::vector<ParseFailure> failures;

  std::size_t size() const { return graphs.size(); }
};

Dataset parseDataset(const std::vector<DatasetRecord>& records,
                     const std::shared_ptr<const AtomVocabulary>& vocab);
Dataset loadDataset(const std::string& path,
                    const std::shared_ptr<const AtomVocabulary>& vocab);

}  // namespace ccgvae

#endif  // CCGVAE_SMILES_H_
