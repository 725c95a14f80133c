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

#include "ccgvae/decoder.h"

#include <stdexcept>
#include <string>

#include "ccgvae/encoder.h"

namespace ccgvae {

namespace {

Tensor normalizedRow(const ValenceHistogram& h, int m) {
  Tensor t(1, h.nu());
  for (int v = 1; v <= h.nu(); ++v) {
    t(0, v - 1) = static_cast<float>(h[v]) / static_cast<float>(m);
  }
  return t;
}

std::vector<std::uint8_t> typeMask(const AtomVocabulary& vocab,
                                   const ValenceHistogram& diff) {
  std::vector<std::uint8_t> mask(vocab.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    mask[i] = diff[vocab[i].valence] > 0;
    any = any || mask[i];
  }
  // alpha^d_t keeps m - t + 1 >= 1 atoms over valences present in the
  // vocabulary, so some type is always free.
  if (!any) {
    throw std::logic_error("every atom type masked by " + diff.toString());
  }
  return mask;
}

// Bucket-wise max(a - b, 0); only differs from subtract() after a fallback
// draw broke compatibility.
ValenceHistogram saturatingSubtract(const ValenceHistogram& a,
                                    const ValenceHistogram& b) {
  std::vector<int> out(a.nu());
  for (int v = 1; v <= a.nu(); ++v) out[v - 1] = std::max(a[v] - b[v], 0);
  return ValenceHistogram(std::move(out));
}

int sampleIndex(Rng& rng, const Tensor& probs) {
  return static_cast<int>(
      sampleCategorical<float>(rng, std::span<const float>(probs.values())));
}

Tensor distanceOneHot(const MolecularGraph& g, int focus, bool with_stop) {
  const int m = g.atomCount();
  const auto dist = bfsDistances(g, focus);
  Tensor t(m + (with_stop ? 1 : 0), kDistanceBuckets);
  for (int u = 0; u < m; ++u) t(u, distanceBucket(dist[u])) = 1.0f;
  if (with_stop) t(m, kUnreachableBucket) = 1.0f;
  return t;
}

void refreshStates(Tape& tape, const Model& model, DecoderState& s) {
  s.h = model.nets().decoderStates(s.h0, adjacencyOf(s.graph));
  std::vector<int> connected;
  for (int v = 0; v < s.graph.atomCount(); ++v) {
    if (s.graph.degree(v) > 0) connected.push_back(v);
  }
  if (connected.empty()) {
    s.h_t = tape.constant(Tensor(1, model.stateDim()));
  } else {
    s.h_t = meanRows(gatherRows(s.h, std::move(connected)));
  }
}

const char* orderSymbol(BondOrder o) {
  switch (o) {
    case BondOrder::kSingle: return "1";
    case BondOrder::kDouble: return "2";
    case BondOrder::kTriple: return "3";
  }
  return "?";
}

}  // namespace

TypingResult assignAtomTypes(Tape& tape, const Model& model, Var z,
                             const ValenceHistogram& alpha0,
                             const HistogramDistribution* dist,
                             DecodeMode mode, std::span<const int> teacher,
                             Rng& rng) {
  const AtomVocabulary& vocab = model.vocabulary();
  const int m = z.rows();
  if (alpha0.nu() != model.nu()) {
    throw std::invalid_argument("alpha_0 has nu=" + std::to_string(alpha0.nu()) +
                                ", vocabulary needs " +
                                std::to_string(model.nu()));
  }
  if (alpha0.total() != m) {
    throw std::invalid_argument("alpha_0 counts " +
                                std::to_string(alpha0.total()) +
                                " atoms for " + std::to_string(m) +
                                " latent rows");
  }
  if (mode == DecodeMode::kGeneration && dist == nullptr) {
    throw std::invalid_argument("generation needs a histogram distribution");
  }
  TypingResult out;
  out.initial = alpha0;
  out.probabilities = Tensor(m, static_cast<int>(vocab.size()));

  if (mode == DecodeMode::kTraining) {
    if (static_cast<int>(teacher.size()) != m) {
      throw std::invalid_argument("teacher types do not match latent rows");
    }
    // Teacher forcing fixes every alpha^u_{t-1} up front, so all steps run
    // as one batch.
    Tensor diff_rows(m, alpha0.nu()), used_rows(m, alpha0.nu());
    std::vector<std::vector<std::uint8_t>> masks;
    ValenceHistogram used(alpha0.nu());
    for (int t = 0; t < m; ++t) {
      const int type = teacher[t];
      if (type < 0 || type >= static_cast<int>(vocab.size())) {
        throw std::invalid_argument("teacher type out of vocabulary");
      }
      const ValenceHistogram diff = subtract(alpha0, used);
      const Tensor dn = normalizedRow(diff, m), un = normalizedRow(used, m);
      diff_rows.mat().row(t) = dn.mat().row(0);
      used_rows.mat().row(t) = un.mat().row(0);
      masks.push_back(typeMask(vocab, diff));
      if (!masks.back()[type]) {
        throw std::invalid_argument("teacher atom type " + vocab[type].symbol +
                                    " is masked by " + diff.toString());
      }
      used = updateWithValence(used, vocab[type].valence);
      out.types.push_back(type);
      out.steps.push_back({diff, used, alpha0, type, false});
    }
    const Var logits = model.nets().typingLogits(
        z, tape.constant(std::move(diff_rows)), tape.constant(std::move(used_rows)));
    for (int t = 0; t < m; ++t) {
      const Var p = maskedSoftmax(sliceRows(logits, t, 1), masks[t]);
      out.probabilities.mat().row(t) = p.value().mat().row(0);
      const Var ce = crossEntropy(p, teacher[t], masks[t]);
      out.loss = out.loss.valid() ? add(out.loss, ce) : ce;
    }
    return out;
  }

  ValenceHistogram target = alpha0;  // alpha_{t-1}
  ValenceHistogram used(alpha0.nu());
  for (int t = 0; t < m; ++t) {
    const ValenceHistogram diff = out.fallback_count == 0
                                      ? subtract(target, used)
                                      : saturatingSubtract(target, used);
    const auto mask = typeMask(vocab, diff);
    const Var logits = model.nets().typingLogits(
        sliceRows(z, t, 1), tape.constant(normalizedRow(diff, m)),
        tape.constant(normalizedRow(used, m)));
    const Var p = maskedSoftmax(logits, mask);
    out.probabilities.mat().row(t) = p.value().mat().row(0);
    const int type = sampleIndex(rng, p.value());
    used = updateWithValence(used, vocab[type].valence);
    bool fallback = false;
    if (mode == DecodeMode::kGeneration) {
      auto drawn = sampleCompatible(*dist, used, m, rng);
      target = std::move(drawn.histogram);
      fallback = drawn.fallback;
      out.fallback_count += fallback;
    }
    out.types.push_back(type);
    out.steps.push_back({diff, used, target, type, fallback});
  }
  return out;
}

DecoderState initializeDecoderState(Tape& tape, const Model& model, Var z,
                                    std::span<const int> types, Rng& rng) {
  if (static_cast<int>(types.size()) != z.rows() || types.empty()) {
    throw std::invalid_argument("need one type per latent row");
  }
  DecoderState s;
  s.graph = MolecularGraph(model.sharedVocabulary());
  for (const int t : types) s.graph.addAtom(t);
  s.h0 = model.nets().decoderInitialStates(tape, z, types);
  s.h = s.h0;
  s.h_init = meanRows(s.h0);
  s.h_t = tape.constant(Tensor(1, model.stateDim()));
  s.start = s.focus = static_cast<int>(uniformIndex(rng, types.size()));
  s.reached.assign(types.size(), 0);
  s.reached[s.focus] = 1;
  return s;
}

EdgeMask edgeMask(const MolecularGraph& g, int focus) {
  const int m = g.atomCount();
  EdgeMask mask;
  mask.candidates.assign(m + 1, 0);
  mask.types.assign(static_cast<std::size_t>(m) * kNumBondTypes, 0);
  const int rv = remainingValence(g, focus);
  for (int u = 0; u < m; ++u) {
    if (u == focus || g.bondBetween(focus, u).has_value()) continue;
    const int free = std::min(rv, remainingValence(g, u));
    if (free < 1) continue;
    mask.candidates[u] = 1;
    for (int k = 1; k <= std::min(free, kNumBondTypes); ++k) {
      mask.types[static_cast<std::size_t>(u) * kNumBondTypes + k - 1] = 1;
    }
  }
  mask.candidates[m] = 1;
  return mask;
}

namespace {

EdgeFeatures allCandidates(Tape& tape, const Model& model,
                           const DecoderState& s, int focus) {
  return {sliceRows(s.h, focus, 1),
          concatRows<float>({s.h, model.nets().stopState(tape)}),
          tape.constant(distanceOneHot(s.graph, focus, /*with_stop=*/true)),
          s.h_init, s.h_t};
}

EdgeFeatures oneCandidate(Tape& tape, const DecoderState& s, int focus,
                          int u) {
  const auto dist = bfsDistances(s.graph, focus);
  Tensor onehot(1, kDistanceBuckets);
  onehot(0, distanceBucket(dist[u])) = 1.0f;
  return {sliceRows(s.h, focus, 1), sliceRows(s.h, u, 1),
          tape.constant(std::move(onehot)), s.h_init, s.h_t};
}

Var candidateProbabilities(Tape& tape, const Model& model,
                           const DecoderState& s, int focus,
                           const std::vector<std::uint8_t>& mask) {
  const Var logits =
      transpose(model.nets().existenceLogits(allCandidates(tape, model, s, focus)));
  return maskedSoftmax(logits, mask);
}

}  // namespace

EdgeScores scoreEdges(Tape& tape, const Model& model, const DecoderState& s,
                      int focus) {
  const int m = s.graph.atomCount();
  const EdgeMask mask = edgeMask(s.graph, focus);
  EdgeScores out;
  out.candidate = candidateProbabilities(tape, model, s, focus, mask.candidates)
                      .value()
                      .values();
  out.bond_type = Tensor(m, kNumBondTypes);
  out.joint = Tensor(m, kNumBondTypes);
  // Batched over all atoms; rows of masked candidates are discarded.
  EdgeFeatures phi = allCandidates(tape, model, s, focus);
  phi.candidates = s.h;
  phi.distance = tape.constant(distanceOneHot(s.graph, focus, false));
  const Tensor logits = model.nets().bondTypeLogits(phi).value();
  for (int u = 0; u < m; ++u) {
    if (!mask.candidates[u]) continue;
    std::vector<std::uint8_t> row(mask.types.begin() + u * kNumBondTypes,
                                  mask.types.begin() + (u + 1) * kNumBondTypes);
    Tensor lrow(1, kNumBondTypes);
    for (int k = 0; k < kNumBondTypes; ++k) lrow[k] = logits(u, k);
    const Tensor p = maskedSoftmax(tape.constant(lrow), row).value();
    for (int k = 0; k < kNumBondTypes; ++k) {
      out.bond_type(u, k) = p[k];
      out.joint(u, k) = out.candidate[u] * p[k];
    }
  }
  return out;
}

BondDecodeResult decodeBonds(Tape& tape, const Model& model, DecoderState& s,
                             DecodeMode mode, const TeacherTrajectory* teacher,
                             Rng& rng, std::ostream* trace) {
  const int m = s.graph.atomCount();
  const bool training = mode == DecodeMode::kTraining;
  if (training) {
    if (teacher == nullptr) {
      throw std::invalid_argument("training decode needs a teacher trajectory");
    }
    if (teacher->start < 0 || teacher->start >= m) {
      throw std::invalid_argument("teacher start atom out of range");
    }
    s.reached.assign(m, 0);
    s.fifo.clear();
    s.start = s.focus = teacher->start;
    s.reached[s.focus] = 1;
  }
  BondDecodeResult out;
  std::size_t next = 0;  // teacher decision index
  // Every bond uses up valence of its focus and every STOP retires an atom.
  const int max_steps = m * (model.nu() + 1) + 1;
  for (int step = 0;; ++step) {
    if (step > max_steps) throw std::logic_error("bond decoding did not stop");
    const EdgeMask mask = edgeMask(s.graph, s.focus);
    const Var p = candidateProbabilities(tape, model, s, s.focus, mask.candidates);

    int target;
    const TeacherDecision* forced = nullptr;
    if (training) {
      if (next >= teacher->decisions.size()) {
        throw std::invalid_argument("teacher trajectory ended early");
      }
      forced = &teacher->decisions[next++];
      if (forced->focus != s.focus) {
        throw std::invalid_argument(
            "teacher trajectory focus " + std::to_string(forced->focus) +
            " differs from decoder focus " + std::to_string(s.focus));
      }
      target = forced->target == kStop ? m : forced->target;
      if (target < 0 || target > m) {
        throw std::invalid_argument("teacher target out of range");
      }
      const Var ce = crossEntropy(p, target, mask.candidates);
      out.loss = out.loss.valid() ? add(out.loss, ce) : ce;
    } else {
      target = sampleIndex(rng, p.value());
    }

    EdgeDecision d;
    d.focus = s.focus;
    d.p_target = p.value()[target];
    if (target == m) {
      out.decisions.push_back(d);
      if (trace) *trace << "t=" << step << " focus=" << s.focus << " -> STOP\n";
      if (s.fifo.empty()) break;
      s.focus = s.fifo.front();
      s.fifo.pop_front();
      continue;
    }

    const std::vector<std::uint8_t> tmask(
        mask.types.begin() + target * kNumBondTypes,
        mask.types.begin() + (target + 1) * kNumBondTypes);
    const Var pt = maskedSoftmax(
        model.nets().bondTypeLogits(oneCandidate(tape, s, s.focus, target)),
        tmask);
    int l;
    if (training) {
      l = bondTypeIndex(forced->order);
      const Var ce = crossEntropy(pt, l, tmask);
      out.loss = add(out.loss, ce);
    } else {
      l = sampleIndex(rng, pt.value());
    }
    d.target = target;
    d.order = bondOrderFromIndex(l);
    d.p_order = pt.value()[l];
    out.decisions.push_back(d);
    if (trace) {
      *trace << "t=" << step << " focus=" << s.focus << " -> (u=" << target
             << ", l=" << orderSymbol(d.order) << ")\n";
    }
    s.graph.addBond(s.focus, target, d.order);
    if (!s.reached[target]) {
      s.reached[target] = 1;
      s.fifo.push_back(target);
    }
    refreshStates(tape, model, s);
  }
  if (training && next != teacher->decisions.size()) {
    throw std::invalid_argument("teacher trajectory has unused decisions");
  }

  if (s.graph.bondCount() == 0) {
    const int keep[] = {s.start};
    out.molecule = completeWithHydrogens(inducedSubgraph(s.graph, keep));
  } else {
    out.molecule = completeWithHydrogens(removeIsolatedAtoms(s.graph));
  }
  return out;
}

DecodeOutput decodeLatent(const Model& model, const Tensor& z,
                          const ValenceHistogram& alpha0,
                          const HistogramDistribution* dist, DecodeMode mode,
                          Rng& rng, std::ostream* trace) {
  if (mode == DecodeMode::kTraining) {
    throw std::invalid_argument("decodeLatent samples; use decodeBonds for "
                                "teacher forcing");
  }
  Tape tape(/*grad_enabled=*/false);
  const Var zv = tape.constant(z);
  DecodeOutput out;
  out.typing = assignAtomTypes(tape, model, zv, alpha0, dist, mode, {}, rng);
  if (trace) {
    *trace << "alpha_0=" << alpha0.toString() << "\n";
    for (std::size_t t = 0; t < out.typing.steps.size(); ++t) {
      const auto& st = out.typing.steps[t];
      *trace << "type t=" << t + 1 << " diff=" << st.difference.toString()
             << " tau=" << model.vocabulary()[st.type].symbol
             << " used=" << st.used.toString()
             << " alpha=" << st.target.toString()
             << " fallback=" << (st.fallback ? 1 : 0) << "\n";
    }
  }
  DecoderState state = initializeDecoderState(tape, model, zv, out.typing.types, rng);
  auto bonds = decodeBonds(tape, model, state, mode, nullptr, rng, trace);
  out.molecule = std::move(bonds.molecule);
  out.decisions = std::move(bonds.decisions);
  return out;
}

DecodeOutput generateMolecule(const Model& model,
                              const HistogramDistribution& dist, Rng& rng,
                              std::ostream* trace) {
  const InitialHistogram init = sampleInitial(dist, rng);
  const Tensor z = samplePrior(init.atoms, model.config().latent_dim, rng);
  return decodeLatent(model, z, init.histogram, &dist, DecodeMode::kGeneration,
                      rng, trace);
}

DecodeOutput reconstructMolecule(const Model& model, const MolecularGraph& g,
                                 Rng& rng) {
  Tensor z;
  {
    Tape tape(/*grad_enabled=*/false);
    const LatentEncoding enc = encode(tape, model, g);
    z = reparameterize(tape, enc, rng).value();
  }
  return decodeLatent(model, z, histogramOfValences(g, false), nullptr,
                      DecodeMode::kReconstruction, rng);
}

}  // namespace ccgvae
