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

// Command-line entry point: preprocess, train, generate, reconstruct,
// optimize and evaluate.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccgvae/checkpoint.h"
#include "ccgvae/decoder.h"
#include "ccgvae/encoder.h"
#include "ccgvae/metrics.h"
#include "ccgvae/model.h"
#include "ccgvae/run_config.h"
#include "ccgvae/smiles.h"
#include "ccgvae/training.h"
#include "ccgvae/valence_histogram.h"

namespace ccgvae {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // key=value, applied after the file
};

RunConfig resolveConfig(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? RunConfig{} : loadRunConfig(opt.config);
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
  cfg.validate();
  return cfg;
}

std::shared_ptr<const AtomVocabulary> loadVocabulary(const std::string& path) {
  return std::make_shared<const AtomVocabulary>(
      path.empty() ? AtomVocabulary::qm9() : AtomVocabulary::load(path));
}

Dataset loadCorpus(const std::string& path,
                   const std::shared_ptr<const AtomVocabulary>& vocab,
                   const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " file required");
  Dataset ds = loadDataset(path, vocab);
  for (const auto& f : ds.failures) {
    std::cerr << "skipped line=" << f.line << " smiles=" << f.smiles
              << " reason=" << f.message << "\n";
  }
  if (ds.size() == 0) {
    throw std::runtime_error("no molecule of " + path + " could be parsed");
  }
  return ds;
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string corpusText(const Dataset& ds, const std::vector<std::size_t>& idx) {
  std::ostringstream os;
  for (const std::size_t i : idx) {
    os << ds.smiles[i];
    if (ds.properties[i]) os << "\t" << *ds.properties[i];
    os << "\n";
  }
  return os.str();
}

std::unique_ptr<Model> loadModel(const std::string& path, const RunConfig& cfg,
                                 Checkpoint* out = nullptr) {
  if (path.empty()) throw UsageError("--ckpt required");
  if (!fs::exists(path)) throw std::runtime_error("checkpoint not found: " + path);
  Checkpoint ckpt = readCheckpoint(path);
  std::unique_ptr<Model> model = Model::fromCheckpoint(ckpt);
  checkCompatible(cfg, *model);
  if (out) *out = std::move(ckpt);
  return model;
}

HistogramDistribution checkpointDistribution(const Checkpoint& ckpt,
                                             const RunConfig& cfg) {
  if (!cfg.distribution.empty()) {
    return HistogramDistribution::load(cfg.distribution);
  }
  const std::string* text = ckpt.meta("histograms");
  if (text == nullptr) {
    throw std::runtime_error(
        "checkpoint has no histogram distribution; pass distribution=<file>");
  }
  return HistogramDistribution::parse(*text);
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string data, vocab, out;
  double test_fraction = 0.1;
};

int runPreprocess(const Options& opt, const PreprocessArgs& a) {
  RunConfig cfg = resolveConfig(opt);
  if (!a.vocab.empty()) cfg.vocab = fs::absolute(a.vocab).string();
  if (a.test_fraction < 0.0 || a.test_fraction >= 1.0) {
    throw UsageError("--test-fraction must lie in [0, 1)");
  }
  const auto vocab = loadVocabulary(cfg.vocab);
  const Dataset ds = loadCorpus(a.data, vocab, "--data");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_test = std::min(
      ds.size() - 1,
      static_cast<std::size_t>(a.test_fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> test(order.begin(), order.begin() + n_test);
  std::vector<std::size_t> train(order.begin() + n_test, order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());

  std::vector<MolecularGraph> train_graphs;
  for (const std::size_t i : train) train_graphs.push_back(ds.graphs[i]);
  const HistogramDistribution dist = HistogramDistribution::build(train_graphs);

  const fs::path out(a.out);
  fs::create_directories(out);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  writeText(out / "corpus.smi", corpusText(ds, all));
  writeText(out / "train.smi", corpusText(ds, train));
  writeText(out / "test.smi", corpusText(ds, test));
  dist.save((out / "histograms.txt").string());
  std::ostringstream manifest;
  manifest << "# seed=" << cfg.seed << " corpus_index split\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool is_test = std::binary_search(test.begin(), test.end(), i);
    manifest << i << "\t" << (is_test ? "test" : "train") << "\n";
  }
  writeText(out / "split.txt", manifest.str());
  std::ostringstream config;
  if (!cfg.vocab.empty()) config << "vocab=" << cfg.vocab << "\n";
  config << "train_data=train.smi\ntest_data=test.smi\n"
         << "distribution=histograms.txt\nseed=" << cfg.seed << "\n";
  writeText(out / "config.txt", config.str());

  std::cout << "parsed=" << ds.size() << "\n"
            << "failures=" << ds.failures.size() << "\n"
            << "train=" << train.size() << "\n"
            << "test=" << test.size() << "\n"
            << "histograms=" << dist.size() << "\n";
  return 0;
}

struct TrainArgs {
  std::string out, data;
};

int runTrain(const Options& opt, const TrainArgs& a) {
  RunConfig cfg = resolveConfig(opt);
  if (!a.data.empty()) cfg.train_data = a.data;
  if (a.out.empty()) throw UsageError("--out required");
  const auto vocab = loadVocabulary(cfg.vocab);
  const Dataset ds = loadCorpus(cfg.train_data, vocab, "train_data");

  std::vector<std::optional<double>> props = ds.properties;
  std::string property_source = "none";
  if (cfg.weights.lambda_opt > 0.0) {
    const bool complete = std::all_of(props.begin(), props.end(),
                                      [](const auto& p) { return p.has_value(); });
    if (complete) {
      property_source = "column";
    } else {
      for (std::size_t i = 0; i < ds.size(); ++i) {
        props[i] = proxyProperty(ds.graphs[i], cfg.proxy_max_atoms);
      }
      property_source = "proxy:heavy_atoms/" + std::to_string(cfg.proxy_max_atoms);
      std::cerr << "property column incomplete; using proxy property "
                << property_source << "\n";
    }
  }
  const HistogramDistribution dist =
      cfg.distribution.empty() ? HistogramDistribution::build(ds.graphs)
                               : HistogramDistribution::load(cfg.distribution);

  Model model(vocab, cfg.model, cfg.seed);
  Rng rng(cfg.seed);
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.adam = cfg.adam;
  tc.weights = cfg.weights;
  tc.checkpoint_path = a.out;
  tc.checkpoint_metadata = {{"histograms", dist.serialize()},
                            {"property", property_source},
                            {"seed", std::to_string(cfg.seed)}};
  trainLoop(model, ds.graphs, props, tc, rng, &std::cout);
  std::cerr << "checkpoint=" << a.out << "\n";
  return 0;
}

struct GenerateArgs {
  std::string ckpt, out;
  std::size_t n = 100;
};

int runGenerate(const Options& opt, const GenerateArgs& a) {
  const RunConfig cfg = resolveConfig(opt);
  Checkpoint ckpt;
  const auto model = loadModel(a.ckpt, cfg, &ckpt);
  const HistogramDistribution dist = checkpointDistribution(ckpt, cfg);
  Rng rng(cfg.seed);
  std::ostringstream os;
  for (std::size_t i = 0; i < a.n; ++i) {
    const DecodeOutput out = generateMolecule(*model, dist, rng);
    os << writeSmiles(out.molecule) << "\tfallback=" << (out.fallback() ? 1 : 0)
       << "\n";
  }
  if (a.out.empty() || a.out == "-") {
    std::cout << os.str();
  } else {
    writeText(a.out, os.str());
  }
  return 0;
}

struct ReconstructArgs {
  std::string ckpt, data;
  std::optional<int> encodings;
  std::optional<std::size_t> cap;
};

int runReconstruct(const Options& opt, const ReconstructArgs& a) {
  RunConfig cfg = resolveConfig(opt);
  if (!a.data.empty()) cfg.test_data = a.data;
  if (a.encodings) cfg.encodings = *a.encodings;
  if (a.cap) cfg.recon_cap = *a.cap;
  cfg.validate();
  const auto model = loadModel(a.ckpt, cfg);
  const Dataset ds =
      loadCorpus(cfg.test_data, model->sharedVocabulary(), "test data");
  Rng rng(cfg.seed);
  EvaluationReport report;
  report.reconstruction = reconstructionRate(
      *model, ds.graphs, {cfg.encodings, cfg.recon_cap}, rng);
  report.reconstruction->skipped = ds.failures.size();
  std::cout << formatReport(report);
  return 0;
}

struct OptimizeArgs {
  std::string ckpt, smiles, direction = "up";
  int steps = 50;
  double step_size = 0.1;
};

int runOptimize(const Options& opt, const OptimizeArgs& a) {
  const RunConfig cfg = resolveConfig(opt);
  if (a.direction != "up" && a.direction != "down") {
    throw UsageError("--direction must be up or down");
  }
  if (a.steps < 0) throw UsageError("--steps must be >= 0");
  const auto model = loadModel(a.ckpt, cfg);
  const MolecularGraph g = parseSmiles(a.smiles, model->sharedVocabulary());
  Rng rng(cfg.seed);
  Tensor mu;
  {
    Tape tape(/*grad_enabled=*/false);
    mu = encode(tape, *model, g).mu.value();
  }
  const LatentTrace trace =
      optimizeLatent(*model, mu,
                     a.direction == "up" ? Direction::kAscend : Direction::kDescend,
                     a.steps, a.step_size);
  const DecodeOutput out =
      decodeLatent(*model, trace.z, histogramOfValences(g, false), nullptr,
                   DecodeMode::kReconstruction, rng);
  std::cout << "input=" << writeSmiles(g) << "\n"
            << "optimized=" << writeSmiles(out.molecule) << "\n"
            << "property_before=" << trace.predictions.front() << "\n"
            << "property_after=" << trace.predictions.back() << "\n"
            << "rejected_steps=" << trace.rejected_steps << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string ckpt, train_data, test_data, decoder = "model", table;
  std::optional<std::size_t> samples;
  std::optional<int> encodings;
  std::optional<std::size_t> cap;
};

int runEvaluate(const Options& opt, const EvaluateArgs& a) {
  RunConfig cfg = resolveConfig(opt);
  if (!a.train_data.empty()) cfg.train_data = a.train_data;
  if (!a.test_data.empty()) cfg.test_data = a.test_data;
  if (a.samples) cfg.samples = *a.samples;
  if (a.encodings) cfg.encodings = *a.encodings;
  if (a.cap) cfg.recon_cap = *a.cap;
  cfg.validate();
  if (a.decoder != "model" && a.decoder != "identity") {
    throw UsageError("--decoder must be model or identity");
  }
  Checkpoint ckpt;
  const auto model = loadModel(a.ckpt, cfg, &ckpt);
  const auto vocab = model->sharedVocabulary();
  Rng rng(cfg.seed);
  EvaluationReport report;
  if (!cfg.test_data.empty()) {
    const Dataset test = loadCorpus(cfg.test_data, vocab, "test data");
    const ReconstructionConfig rc{cfg.encodings, cfg.recon_cap};
    if (a.decoder == "identity") {
      report.reconstruction = reconstructionRate(
          test.graphs, [](const MolecularGraph& g, Rng&) { return g; }, rc, rng);
    } else {
      report.reconstruction = reconstructionRate(*model, test.graphs, rc, rng);
    }
    report.reconstruction->skipped = test.failures.size();
  }
  if (a.decoder == "model") {
    const Dataset train = loadCorpus(cfg.train_data, vocab, "train data");
    const HistogramDistribution dist = checkpointDistribution(ckpt, cfg);
    report.generation = generationReport(*model, dist, TrainingIndex(train.graphs),
                                         cfg.samples, rng);
  }
  std::cout << formatReport(report);
  if (!a.table.empty()) writeText(a.table, formatTable(report));
  return 0;
}

}  // namespace
}  // namespace ccgvae

int main(int argc, char** argv) {
  using namespace ccgvae;
  CLI::App app{"Conditional constrained graph VAE for molecules"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "key=value config file");
  app.add_option("--seed", opt.seed, "seed for all randomness");
  app.add_option("--set", opt.overrides, "config override key=value")
      ->take_all();

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "parse, split, histograms");
  preprocess->add_option("--data", pre.data)->required();
  preprocess->add_option("--vocab", pre.vocab);
  preprocess->add_option("--out", pre.out)->required();
  preprocess->add_option("--test-fraction", pre.test_fraction);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--out", tr.out)->required();
  train->add_option("--data", tr.data, "training corpus (overrides train_data)");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "sample molecules");
  generate->add_option("--ckpt", gen.ckpt)->required();
  generate->add_option("-n", gen.n);
  generate->add_option("--out", gen.out);

  ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruction rate");
  reconstruct->add_option("--ckpt", rec.ckpt)->required();
  reconstruct->add_option("--data", rec.data);
  reconstruct->add_option("--encodings", rec.encodings);
  reconstruct->add_option("--cap", rec.cap);

  OptimizeArgs op;
  auto* optimize = app.add_subcommand("optimize", "latent property optimization");
  optimize->add_option("--ckpt", op.ckpt)->required();
  optimize->add_option("--smiles", op.smiles)->required();
  optimize->add_option("--steps", op.steps);
  optimize->add_option("--direction", op.direction);
  optimize->add_option("--step-size", op.step_size);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "evaluation report");
  evaluate->add_option("--ckpt", ev.ckpt)->required();
  evaluate->add_option("--train-data", ev.train_data);
  evaluate->add_option("--test-data", ev.test_data);
  evaluate->add_option("--samples", ev.samples);
  evaluate->add_option("--encodings", ev.encodings);
  evaluate->add_option("--cap", ev.cap);
  evaluate->add_option("--decoder", ev.decoder, "model or identity");
  evaluate->add_option("--table", ev.table, "write the table to this file");

  // Global options are accepted after the subcommand name too.
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (*preprocess) return runPreprocess(opt, pre);
    if (*train) return runTrain(opt, tr);
    if (*generate) return runGenerate(opt, gen);
    if (*reconstruct) return runReconstruct(opt, rec);
    if (*optimize) return runOptimize(opt, op);
    if (*evaluate) return runEvaluate(opt, ev);
  } catch (const ModelMismatchError& e) {
    std::cerr << "error=checkpoint_mismatch message=\"" << e.what() << "\"\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error=config message=\"" << e.what() << "\"\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error=usage message=\"" << e.what() << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error=runtime message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}
