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

#include "ccgvae/smiles.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "ccgvae/canonical.h"

namespace ccgvae {

namespace {

using Kind = SmilesError::Kind;

bool isOrganicSubset(std::string_view symbol) {
  static constexpr std::string_view kOrganic[] = {"B", "C", "N",  "O",  "P",
                                                  "S", "F", "Cl", "Br", "I"};
  return std::find(std::begin(kOrganic), std::end(kOrganic), symbol) !=
         std::end(kOrganic);
}

bool isAromaticOrganic(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

// "c" -> "C", "se" -> "Se".
std::string elementSymbol(std::string_view written) {
  std::string out(written);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(out[0]));
  return out;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view s) : s_(s) {}

  std::vector<SmilesToken> run() {
    std::vector<SmilesToken> tokens;
    while (i_ < s_.size()) tokens.push_back(next());
    return tokens;
  }

 private:
  [[noreturn]] void fail(Kind kind, std::size_t at, const std::string& msg) {
    throw SmilesError(kind, at + 1, msg);
  }

  SmilesToken make(SmilesToken::Kind kind) {
    SmilesToken t;
    t.kind = kind;
    t.position = i_ + 1;
    return t;
  }

  SmilesToken next() {
    const char c = s_[i_];
    switch (c) {
      case '(': {
        auto t = make(SmilesToken::Kind::kBranchOpen);
        ++i_;
        return t;
      }
      case ')': {
        auto t = make(SmilesToken::Kind::kBranchClose);
        ++i_;
        return t;
      }
      case '.': {
        auto t = make(SmilesToken::Kind::kDot);
        ++i_;
        return t;
      }
      case '-':
      case '=':
      case '#':
      case ':': {
        auto t = make(SmilesToken::Kind::kBond);
        t.order = c == '-' ? 1 : c == '=' ? 2 : c == '#' ? 3 : 0;
        ++i_;
        return t;
      }
      case '/':
      case '\\':
        fail(Kind::kUnsupported, i_, "stereo bonds are not supported");
      case '$':
        fail(Kind::kUnsupported, i_, "quadruple bonds are not supported");
      case '%': {
        auto t = make(SmilesToken::Kind::kRingBond);
        if (i_ + 2 >= s_.size() ||
            !std::isdigit(static_cast<unsigned char>(s_[i_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s_[i_ + 2]))) {
          fail(Kind::kSyntax, i_, "'%' must be followed by two digits");
        }
        t.ring = (s_[i_ + 1] - '0') * 10 + (s_[i_ + 2] - '0');
        i_ += 3;
        return t;
      }
      case '[':
        return bracketAtom();
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      auto t = make(SmilesToken::Kind::kRingBond);
      t.ring = c - '0';
      ++i_;
      return t;
    }
    auto t = make(SmilesToken::Kind::kAtom);
    if (c == 'B' || c == 'C') {
      const char second = c == 'B' ? 'r' : 'l';
      if (i_ + 1 < s_.size() && s_[i_ + 1] == second) {
        t.symbol = std::string{c, second};
        i_ += 2;
        return t;
      }
    }
    if (c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'P' || c == 'S' ||
        c == 'F' || c == 'I') {
      t.symbol = std::string(1, c);
      ++i_;
      return t;
    }
    if (isAromaticOrganic(c)) {
      t.symbol = std::string(1, c);
      t.aromatic = true;
      ++i_;
      return t;
    }
    if (c == '*') fail(Kind::kUnsupported, i_, "wildcard atoms not supported");
    if (c == '@') fail(Kind::kUnsupported, i_, "chirality is not supported");
    fail(Kind::kSyntax, i_,
         std::string("unexpected character '") + c + "'");
  }

  SmilesToken bracketAtom() {
    auto t = make(SmilesToken::Kind::kAtom);
    const std::size_t open = i_;
    t.bracket = true;
    ++i_;
    auto peek = [&]() -> char { return i_ < s_.size() ? s_[i_] : '\0'; };
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      fail(Kind::kUnsupported, i_, "isotopes are not supported");
    }
    const char first = peek();
    if (std::isupper(static_cast<unsigned char>(first))) {
      t.symbol = std::string(1, first);
      ++i_;
      if (std::islower(static_cast<unsigned char>(peek()))) {
        t.symbol += peek();
        ++i_;
      }
    } else if (std::islower(static_cast<unsigned char>(first))) {
      t.aromatic = true;
      if ((first == 's' && i_ + 1 < s_.size() && s_[i_ + 1] == 'e') ||
          (first == 'a' && i_ + 1 < s_.size() && s_[i_ + 1] == 's')) {
        t.symbol = s_.substr(i_, 2);
        i_ += 2;
      } else if (isAromaticOrganic(first)) {
        t.symbol = std::string(1, first);
        ++i_;
      } else {
        fail(Kind::kSyntax, i_, "bad aromatic symbol in bracket atom");
      }
    } else if (first == '*') {
      fail(Kind::kUnsupported, i_, "wildcard atoms not supported");
    } else {
      fail(Kind::kSyntax, i_, "bracket atom needs an element symbol");
    }
    if (peek() == '@') fail(Kind::kUnsupported, i_, "chirality not supported");
    if (peek() == 'H') {
      ++i_;
      t.hydrogens = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        t.hydrogens = peek() - '0';
        ++i_;
      }
    }
    if (peek() == '+' || peek() == '-') {
      fail(Kind::kUnsupported, i_, "formal charges are not supported");
    }
    if (peek() == ':') fail(Kind::kUnsupported, i_, "atom classes unsupported");
    if (peek() != ']') {
      if (i_ >= s_.size()) fail(Kind::kSyntax, open, "unclosed '['");
      fail(Kind::kSyntax, i_, "unexpected character in bracket atom");
    }
    ++i_;
    return t;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

struct PendingAtom {
  int type = 0;
  bool aromatic = false;
  bool bracket = false;
  int hydrogens = 0;
  std::size_t position = 0;
};

// order 0 = aromatic, resolved by kekulization.
struct PendingBond {
  int u = 0;
  int v = 0;
  int order = 1;
  std::size_t position = 0;
};

struct RingOpening {
  int atom = 0;
  int order = -1;  // -1: unspecified
  std::size_t position = 0;
};

class Kekulizer {
 public:
  Kekulizer(const std::vector<PendingAtom>& atoms,
            std::vector<PendingBond>& bonds, const AtomVocabulary& vocab)
      : atoms_(atoms), bonds_(bonds), vocab_(vocab) {}

  void run() {
    const int n = static_cast<int>(atoms_.size());
    std::vector<int> base(n, 0);
    incident_.assign(n, {});
    for (int b = 0; b < static_cast<int>(bonds_.size()); ++b) {
      const auto& bond = bonds_[b];
      const int w = bond.order == 0 ? 1 : bond.order;
      base[bond.u] += w;
      base[bond.v] += w;
      if (bond.order == 0) {
        incident_[bond.u].push_back(b);
        incident_[bond.v].push_back(b);
      }
    }
    need_.assign(n, false);
    bool any = false;
    for (int a = 0; a < n; ++a) {
      if (!atoms_[a].aromatic) continue;
      const int free = vocab_[atoms_[a].type].valence - base[a] -
                       (atoms_[a].bracket ? atoms_[a].hydrogens : 0);
      if (free < 0) {
        throw SmilesError(Kind::kValence, atoms_[a].position,
                          "aromatic atom exceeds its valence");
      }
      need_[a] = free >= 1;
      any = any || need_[a];
    }
    matched_.assign(n, false);
    double_.assign(bonds_.size(), false);
    if (any && !match()) {
      throw SmilesError(Kind::kKekulization, 0,
                        "no alternating single/double assignment exists for "
                        "the aromatic system");
    }
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      if (bonds_[b].order == 0) bonds_[b].order = double_[b] ? 2 : 1;
    }
  }

 private:
  int other(int bond, int atom) const {
    return bonds_[bond].u == atom ? bonds_[bond].v : bonds_[bond].u;
  }

  bool match() {
    int pick = -1;
    int best = 0;
    for (int a = 0; a < static_cast<int>(atoms_.size()); ++a) {
      if (!need_[a] || matched_[a]) continue;
      int options = 0;
      for (const int b : incident_[a]) {
        const int o = other(b, a);
        if (need_[o] && !matched_[o]) ++options;
      }
      if (options == 0) return false;
      if (pick < 0 || options < best) {
        pick = a;
        best = options;
      }
    }
    if (pick < 0) return true;
    for (const int b : incident_[pick]) {
      const int o = other(b, pick);
      if (!need_[o] || matched_[o]) continue;
      matched_[pick] = matched_[o] = true;
      double_[b] = true;
      if (match()) return true;
      matched_[pick] = matched_[o] = false;
      double_[b] = false;
    }
    return false;
  }

  const std::vector<PendingAtom>& atoms_;
  std::vector<PendingBond>& bonds_;
  const AtomVocabulary& vocab_;
  std::vector<std::vector<int>> incident_;
  std::vector<bool> need_;
  std::vector<bool> matched_;
  std::vector<bool> double_;
};

std::string ringLabel(int ring) {
  if (ring < 10) return std::to_string(ring);
  return "%" + std::to_string(ring);
}

const char* bondSymbol(BondOrder order) {
  switch (order) {
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    default:
      return "";
  }
}

class Writer {
 public:
  explicit Writer(const MolecularGraph& g) : g_(g) {}

  std::string run() {
    const auto order = canonicalOrder(g_);
    const int n = g_.atomCount();
    rank_.assign(n, 0);
    for (int k = 0; k < n; ++k) rank_[order[k]] = k;
    visited_.assign(n, false);
    children_.assign(n, {});
    openings_.assign(n, {});
    closings_.assign(n, {});
    preorder_.assign(n, -1);
    buildTree(order[0], -1);
    std::string out;
    emit(order[0], out);
    return out;
  }

 private:
  std::vector<Neighbor> sortedNeighbors(int a) const {
    auto nbrs = g_.neighbors(a);
    std::vector<Neighbor> sorted(nbrs.begin(), nbrs.end());
    std::sort(sorted.begin(), sorted.end(),
              [&](const Neighbor& x, const Neighbor& y) {
                return rank_[x.atom] < rank_[y.atom];
              });
    return sorted;
  }

  void buildTree(int a, int parent) {
    visited_[a] = true;
    preorder_[a] = counter_++;
    for (const auto& nb : sortedNeighbors(a)) {
      if (nb.atom == parent) continue;
      if (!visited_[nb.atom]) {
        children_[a].push_back(nb);
        buildTree(nb.atom, a);
      } else if (preorder_[nb.atom] < preorder_[a]) {
        // Back edge: opened at the earlier atom, closed here.
        openings_[nb.atom].push_back({a, nb.order});
        closings_[a].push_back(nb.atom);
      }
    }
  }

  void emit(int a, std::string& out) {
    const auto& type = g_.vocabulary()[g_.atom(a).type];
    if (isOrganicSubset(type.symbol)) {
      out += type.symbol;
    } else {
      out += '[' + type.symbol;
      const int h = g_.atom(a).implicit_h;
      if (h > 0) out += 'H';
      if (h > 1) out += std::to_string(h);
      out += ']';
    }
    // Closings first so their digits can be reused by this atom's openings.
    for (const int partner : closings_[a]) {
      const int ring = ring_of_.at({partner, a});
      out += ringLabel(ring);
      free_rings_.push_back(ring);
    }
    std::sort(openings_[a].begin(), openings_[a].end(),
              [&](const Neighbor& x, const Neighbor& y) {
                return preorder_[x.atom] < preorder_[y.atom];
              });
    for (const auto& open : openings_[a]) {
      int ring;
      if (!free_rings_.empty()) {
        auto it = std::min_element(free_rings_.begin(), free_rings_.end());
        ring = *it;
        free_rings_.erase(it);
      } else {
        ring = ++max_ring_;
      }
      ring_of_[{a, open.atom}] = ring;
      out += bondSymbol(open.order);
      out += ringLabel(ring);
    }
    const auto& kids = children_[a];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool last = i + 1 == kids.size();
      if (!last) out += '(';
      out += bondSymbol(kids[i].order);
      emit(kids[i].atom, out);
      if (!last) out += ')';
    }
  }

  const MolecularGraph& g_;
  std::vector<int> rank_;
  std::vector<bool> visited_;
  std::vector<int> preorder_;
  int counter_ = 0;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Neighbor>> openings_;
  std::vector<std::vector<int>> closings_;
  std::map<std::pair<int, int>, int> ring_of_;
  std::vector<int> free_rings_;
  int max_ring_ = 0;
};

}  // namespace

SmilesError::SmilesError(Kind kind, std::size_t position,
                         const std::string& message)
    : std::runtime_error(std::string(toString(kind)) +
                         (position ? " at position " +
                                         std::to_string(position)
                                   : std::string()) +
                         ": " + message),
      kind_(kind),
      position_(position) {}

const char* toString(SmilesError::Kind kind) {
  switch (kind) {
    case Kind::kSyntax:
      return "syntax error";
    case Kind::kUnknownElement:
      return "unknown element";
    case Kind::kUnpairedRingClosure:
      return "unpaired ring closure";
    case Kind::kValence:
      return "valence error";
    case Kind::kKekulization:
      return "kekulization failure";
    case Kind::kUnsupported:
      return "unsupported feature";
  }
  return "error";
}

std::vector<SmilesToken> tokenizeSmiles(std::string_view smiles) {
  return Tokenizer(smiles).run();
}

MolecularGraph parseSmiles(std::string_view smiles,
                           std::shared_ptr<const AtomVocabulary> vocab) {
  if (!vocab) throw std::invalid_argument("null vocabulary");
  const auto tokens = tokenizeSmiles(smiles);
  if (tokens.empty()) throw SmilesError(Kind::kSyntax, 1, "empty SMILES");

  std::vector<PendingAtom> atoms;
  std::vector<PendingBond> bonds;
  std::map<int, RingOpening> rings;
  struct BranchFrame {
    int atom;
    std::size_t atoms_before;
    std::size_t position;
  };
  std::vector<BranchFrame> branches;
  int prev = -1;
  int pending = -1;  // explicit bond order waiting for its second atom
  std::size_t pending_pos = 0;

  auto hasBond = [&](int u, int v) {
    return std::any_of(bonds.begin(), bonds.end(), [&](const PendingBond& b) {
      return (b.u == u && b.v == v) || (b.u == v && b.v == u);
    });
  };
  auto resolveOrder = [&](int u, int v, int order, std::size_t pos) {
    const bool both_aromatic = atoms[u].aromatic && atoms[v].aromatic;
    if (order < 0) return both_aromatic ? 0 : 1;
    if (order == 0 && !both_aromatic) {
      throw SmilesError(Kind::kSyntax, pos,
                        "aromatic bond between non-aromatic atoms");
    }
    return order;
  };

  for (const auto& tok : tokens) {
    switch (tok.kind) {
      case SmilesToken::Kind::kAtom: {
        const auto type = vocab->indexOf(elementSymbol(tok.symbol));
        if (!type) {
          throw SmilesError(Kind::kUnknownElement, tok.position,
                            "element '" + elementSymbol(tok.symbol) +
                                "' is not in the atom vocabulary");
        }
        atoms.push_back(
            {*type, tok.aromatic, tok.bracket, tok.hydrogens, tok.position});
        const int idx = static_cast<int>(atoms.size()) - 1;
        if (prev >= 0) {
          bonds.push_back({prev, idx,
                           resolveOrder(prev, idx, pending, pending_pos),
                           pending >= 0 ? pending_pos : tok.position});
        }
        pending = -1;
        prev = idx;
        break;
      }
      case SmilesToken::Kind::kBond:
        if (prev < 0) {
          throw SmilesError(Kind::kSyntax, tok.position,
                            "bond without a preceding atom");
        }
        if (pending >= 0) {
          throw SmilesError(Kind::kSyntax, tok.position, "consecutive bonds");
        }
        pending = tok.order;
        pending_pos = tok.position;
        break;
      case SmilesToken::Kind::kBranchOpen:
        if (prev < 0 || pending >= 0) {
          throw SmilesError(Kind::kSyntax, tok.position,
                            "branch must follow an atom");
        }
        branches.push_back({prev, atoms.size(), tok.position});
        break;
      case SmilesToken::Kind::kBranchClose:
        if (branches.empty()) {
          throw SmilesError(Kind::kSyntax, tok.position, "unbalanced ')'");
        }
        if (pending >= 0 || atoms.size() == branches.back().atoms_before) {
          throw SmilesError(Kind::kSyntax, tok.position, "empty branch");
        }
        prev = branches.back().atom;
        branches.pop_back();
        break;
      case SmilesToken::Kind::kRingBond: {
        if (prev < 0) {
          throw SmilesError(Kind::kSyntax, tok.position,
                            "ring closure without a preceding atom");
        }
        auto it = rings.find(tok.ring);
        if (it == rings.end()) {
          rings[tok.ring] = {prev, pending, tok.position};
        } else {
          const auto open = it->second;
          if (open.order >= 0 && pending >= 0 && open.order != pending) {
            throw SmilesError(Kind::kSyntax, tok.position,
                              "conflicting ring closure bond symbols");
          }
          if (open.atom == prev || hasBond(open.atom, prev)) {
            throw SmilesError(Kind::kSyntax, tok.position,
                              "ring closure duplicates a bond");
          }
          const int order = open.order >= 0 ? open.order : pending;
          bonds.push_back({open.atom, prev,
                           resolveOrder(open.atom, prev, order, tok.position),
                           tok.position});
          rings.erase(it);
        }
        pending = -1;
        break;
      }
      case SmilesToken::Kind::kDot:
        if (prev < 0 || pending >= 0 || !branches.empty()) {
          throw SmilesError(Kind::kSyntax, tok.position, "misplaced '.'");
        }
        prev = -1;
        break;
    }
  }
  if (pending >= 0) {
    throw SmilesError(Kind::kSyntax, pending_pos, "dangling bond");
  }
  if (!branches.empty()) {
    throw SmilesError(Kind::kSyntax, branches.back().position,
                      "unclosed '('");
  }
  if (prev < 0) {
    throw SmilesError(Kind::kSyntax, smiles.size(), "SMILES ends with '.'");
  }
  if (!rings.empty()) {
    const auto& [ring, open] = *rings.begin();
    throw SmilesError(Kind::kUnpairedRingClosure, open.position,
                      "ring bond " + ringLabel(ring) + " is never closed");
  }

  Kekulizer(atoms, bonds, *vocab).run();

  std::vector<int> sum(atoms.size(), 0);
  for (const auto& b : bonds) {
    sum[b.u] += b.order;
    sum[b.v] += b.order;
  }
  MolecularGraph g(vocab);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const int valence = (*vocab)[atoms[a].type].valence;
    const int h = atoms[a].bracket ? atoms[a].hydrogens : valence - sum[a];
    if (sum[a] + h > valence || h < 0) {
      throw SmilesError(Kind::kValence, atoms[a].position,
                        "atom exceeds valence " + std::to_string(valence));
    }
    if (sum[a] + h < valence) {
      throw SmilesError(Kind::kValence, atoms[a].position,
                        "bracket atom leaves open valence (radicals are not "
                        "supported)");
    }
    g.addAtom(atoms[a].type, 0);
  }
  for (const auto& b : bonds) {
    g.addBond(b.u, b.v, static_cast<BondOrder>(b.order));
  }
  return completeWithHydrogens(g);
}

std::string writeSmiles(const MolecularGraph& g) {
  if (!isConnected(g)) {
    throw std::invalid_argument("writeSmiles needs a connected, non-empty graph");
  }
  if (!isValenceValid(g)) {
    throw std::invalid_argument("writeSmiles needs a valence-valid graph");
  }
  return Writer(g).run();
}

std::vector<DatasetRecord> parseDatasetRecords(std::string_view text) {
  std::vector<DatasetRecord> records;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    DatasetRecord rec;
    rec.line = line_no;
    const auto tab = line.find('\t');
    rec.smiles = std::string(line.substr(0, tab));
    if (tab != std::string_view::npos) {
      auto prop = line.substr(tab + 1);
      while (!prop.empty() && prop.back() == ' ') prop.remove_suffix(1);
      if (!prop.empty()) {
        double value = 0.0;
        const auto [ptr, ec] =
            std::from_chars(prop.data(), prop.data() + prop.size(), value);
        if (ec == std::errc() && ptr == prop.data() + prop.size()) {
          rec.property = value;
        } else {
          rec.property_error = "bad property value '" + std::string(prop) + "'";
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> readDatasetRecords(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parseDatasetRecords(buffer.str());
}

Dataset parseDataset(const std::vector<DatasetRecord>& records,
                     const std::shared_ptr<const AtomVocabulary>& vocab) {
  Dataset out;
  for (const auto& rec : records) {
    if (!rec.property_error.empty()) {
      out.failures.push_back({rec.line, rec.smiles, rec.property_error});
      continue;
    }
    try {
      out.graphs.push_back(parseSmiles(rec.smiles, vocab));
      out.smiles.push_back(rec.smiles);
      out.properties.push_back(rec.property);
    } catch (const SmilesError& e) {
      out.failures.push_back({rec.line, rec.smiles, e.what()});
    }
  }
  return out;
}

Dataset loadDataset(const std::string& path,
                    const std::shared_ptr<const AtomVocabulary>& vocab) {
  return parseDataset(readDatasetRecords(path), vocab);
}

}  // namespace ccgvae
