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

#ifndef CCGVAE_DECODER_H_
#define CCGVAE_DECODER_H_

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ccgvae/autodiff.h"
#include "ccgvae/chem_graph.h"
#include "ccgvae/model.h"
#include "ccgvae/random.h"
#include "ccgvae/valence_histogram.h"

namespace ccgvae {

enum class DecodeMode { kTraining, kReconstruction, kGeneration };

// ---------------------------------------------------------------------------
// Atom typing conditioned on valence histograms.

struct TypingStep {
  ValenceHistogram difference;  // alpha^d_t = alpha_{t-1} - alpha^u_{t-1}
  ValenceHistogram used;        // alpha^u_t, after this atom
  ValenceHistogram target;      // alpha_t
  int type = 0;
  bool fallback = false;        // alpha_t drawn without the compatibility filter
};

struct TypingResult {
  std::vector<int> types;
  std::vector<TypingStep> steps;
  ValenceHistogram initial;  // alpha_0
  int fallback_count = 0;
  Tensor probabilities;  // m x vocab, masked type distribution per step
  Var loss;  // training: summed type cross-entropy; otherwise unset
};

// Types the m = rows(z) atoms in row order. K sees [z_t, alpha^d_t / m,
// alpha^u_{t-1} / m]; F's distribution is masked to types whose valence
// still has a free slot in alpha^d_t. Training consumes `teacher` types;
// reconstruction and generation sample. alpha_t stays alpha_0 except in
// generation, where it is redrawn with sampleCompatible(dist, alpha^u_t, m).
// Requires sum(alpha0) == m; `dist` is only read in generation.
TypingResult assignAtomTypes(Tape& tape, const Model& model, Var z,
                             const ValenceHistogram& alpha0,
                             const HistogramDistribution* dist,
                             DecodeMode mode, std::span<const int> teacher,
                             Rng& rng);

// ---------------------------------------------------------------------------
// Bond generation.

struct DecoderState {
  MolecularGraph graph;  // typed atoms, bonds added so far, no hydrogens
  Var h0;                // m x D, [z_v, embed(type_v)]
  Var h;                 // current node states
  Var h_init;            // 1 x D, mean of h0
  Var h_t;               // 1 x D, mean over connected atoms (zero if none)
  int start = 0;
  int focus = 0;
  std::deque<int> fifo;
  std::vector<char> reached;  // the start atom and every atom ever queued
};

DecoderState initializeDecoderState(Tape& tape, const Model& model, Var z,
                                    std::span<const int> types, Rng& rng);

struct EdgeMask {
  std::vector<std::uint8_t> candidates;  // m + 1 entries, the last is STOP
  std::vector<std::uint8_t> types;       // m x 3, row u = bond orders 1..3
};

// u is allowed iff u != focus, no focus-u bond exists and both atoms have
// remaining valence >= 1; order k iff both have remaining valence >= k.
// STOP is always allowed.
EdgeMask edgeMask(const MolecularGraph& g, int focus);
inline EdgeMask edgeMask(const DecoderState& s, int focus) {
  return edgeMask(s.graph, focus);
}

struct EdgeScores {
  std::vector<float> candidate;  // p(u), m + 1 entries, the last is STOP
  Tensor bond_type;              // m x 3, p(l | u); zero rows for masked u
  Tensor joint;                  // m x 3, p(u) p(l | u)
};

// Probabilities of every decision for `focus` in the current state.
EdgeScores scoreEdges(Tape& tape, const Model& model, const DecoderState& s,
                      int focus);

inline constexpr int kStop = -1;

struct TeacherDecision {
  int focus = 0;
  int target = kStop;
  BondOrder order = BondOrder::kSingle;
};

// Ground-truth decision sequence of one breadth-first construction.
struct TeacherTrajectory {
  int start = 0;
  std::vector<int> visit_order;
  std::vector<TeacherDecision> decisions;
};

struct EdgeDecision {
  int focus = 0;
  int target = kStop;
  BondOrder order = BondOrder::kSingle;
  float p_target = 0.0f;
  float p_order = 0.0f;  // 0 for STOP
};

struct BondDecodeResult {
  MolecularGraph molecule;  // post-processed
  std::vector<EdgeDecision> decisions;
  Var loss;  // training: summed decision cross-entropy; otherwise unset
};

// Breadth-first bond construction from state.focus. Training replays
// `teacher` (which must start at an atom of the same typed graph) and
// accumulates cross-entropies; other modes sample. After the loop isolated
// atoms are dropped (a run without bonds keeps the start atom) and hydrogens
// are completed. `trace` receives one line per decision.
BondDecodeResult decodeBonds(Tape& tape, const Model& model, DecoderState& s,
                             DecodeMode mode, const TeacherTrajectory* teacher,
                             Rng& rng, std::ostream* trace = nullptr);

// ---------------------------------------------------------------------------
// End-to-end decoding.

struct DecodeOutput {
  MolecularGraph molecule;
  TypingResult typing;
  std::vector<EdgeDecision> decisions;
  bool fallback() const { return typing.fallback_count > 0; }
};

// Types and bonds for latent rows z (sampling; mode is kReconstruction or
// kGeneration).
DecodeOutput decodeLatent(const Model& model, const Tensor& z,
                          const ValenceHistogram& alpha0,
                          const HistogramDistribution* dist, DecodeMode mode,
                          Rng& rng, std::ostream* trace = nullptr);

// alpha_0 ~ H, z ~ N(0, I), then decodeLatent in generation mode.
DecodeOutput generateMolecule(const Model& model,
                              const HistogramDistribution& dist, Rng& rng,
                              std::ostream* trace = nullptr);

// Encode, one reparameterized draw, decode with the input's own histogram.
DecodeOutput reconstructMolecule(const Model& model, const MolecularGraph& g,
                                 Rng& rng);

}  // namespace ccgvae

#endif  // CCGVAE_DECODER_H_
