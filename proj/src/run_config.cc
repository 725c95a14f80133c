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

#include "ccgvae/run_config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ccgvae {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parseNumber(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) +
                      "': malformed number '" + std::string(value) + "'");
  }
  return out;
}

bool isPathKey(std::string_view key) {
  return key == "vocab" || key == "train_data" || key == "test_data" ||
         key == "distribution";
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k(key);
  const std::string v(value);
  if (key == "vocab") {
    vocab = v;
  } else if (key == "train_data") {
    train_data = v;
  } else if (key == "test_data") {
    test_data = v;
  } else if (key == "distribution") {
    distribution = v;
  } else if (key == "latent_dim") {
    model.latent_dim = parseNumber<int>(key, value);
  } else if (key == "hidden_dim") {
    model.hidden_dim = parseNumber<int>(key, value);
  } else if (key == "steps") {
    model.encoder_steps = model.decoder_steps = parseNumber<int>(key, value);
    explicit_keys["encoder_steps"] = v;
    explicit_keys["decoder_steps"] = v;
  } else if (key == "encoder_steps") {
    model.encoder_steps = parseNumber<int>(key, value);
  } else if (key == "decoder_steps") {
    model.decoder_steps = parseNumber<int>(key, value);
  } else if (key == "mlp_hidden") {
    model.mlp_hidden = parseNumber<int>(key, value);
  } else if (key == "lambda_latent") {
    weights.lambda_latent = parseNumber<double>(key, value);
  } else if (key == "lambda_opt") {
    weights.lambda_opt = parseNumber<double>(key, value);
  } else if (key == "epochs") {
    epochs = parseNumber<int>(key, value);
  } else if (key == "batch_size") {
    batch_size = parseNumber<int>(key, value);
  } else if (key == "seed") {
    seed = parseNumber<std::uint64_t>(key, value);
  } else if (key == "lr") {
    adam.lr = parseNumber<double>(key, value);
  } else if (key == "beta1") {
    adam.beta1 = parseNumber<double>(key, value);
  } else if (key == "beta2") {
    adam.beta2 = parseNumber<double>(key, value);
  } else if (key == "eps") {
    adam.eps = parseNumber<double>(key, value);
  } else if (key == "encodings") {
    encodings = parseNumber<int>(key, value);
  } else if (key == "recon_cap") {
    recon_cap = parseNumber<std::size_t>(key, value);
  } else if (key == "samples") {
    samples = parseNumber<std::size_t>(key, value);
  } else if (key == "proxy_max_atoms") {
    proxy_max_atoms = parseNumber<int>(key, value);
  } else {
    throw ConfigError("unknown config key '" + k + "'");
  }
  explicit_keys[k] = v;
}

void RunConfig::validate() const {
  const auto positive = [](const char* name, long long v) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive("latent_dim", model.latent_dim);
  positive("hidden_dim", model.hidden_dim);
  positive("encoder_steps", model.encoder_steps);
  positive("decoder_steps", model.decoder_steps);
  positive("mlp_hidden", model.mlp_hidden);
  positive("batch_size", batch_size);
  positive("encodings", encodings);
  positive("recon_cap", static_cast<long long>(recon_cap));
  positive("samples", static_cast<long long>(samples));
  positive("proxy_max_atoms", proxy_max_atoms);
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (weights.lambda_latent < 0.0 || weights.lambda_opt < 0.0) {
    throw ConfigError("loss weights must be >= 0");
  }
  if (!(adam.lr > 0.0)) throw ConfigError("lr must be > 0");
  if (adam.beta1 < 0.0 || adam.beta1 >= 1.0 || adam.beta2 < 0.0 ||
      adam.beta2 >= 1.0) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("eps must be > 0");
  for (const auto& path : {vocab, train_data, test_data, distribution}) {
    if (!path.empty() && !std::filesystem::exists(path)) {
      throw ConfigError("file not found: " + path);
    }
  }
}

void applyConfigText(RunConfig& cfg, std::string_view text,
                     const std::string& base_dir) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    std::string value(trim(line.substr(eq + 1)));
    if (isPathKey(key) && !base_dir.empty() && !value.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (std::filesystem::path(base_dir) / value).lexically_normal();
    }
    cfg.set(key, value);
  }
}

RunConfig loadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  applyConfigText(cfg, buf.str(),
                  std::filesystem::path(path).parent_path().string());
  return cfg;
}

void checkCompatible(const RunConfig& cfg, const Model& model) {
  const ModelConfig& m = model.config();
  const auto check = [&](const char* key, int configured, int actual) {
    if (cfg.isSet(key) && configured != actual) {
      throw ModelMismatchError(std::string(key) + " mismatch: config has " +
                               std::to_string(configured) +
                               ", checkpoint has " + std::to_string(actual));
    }
  };
  check("latent_dim", cfg.model.latent_dim, m.latent_dim);
  check("hidden_dim", cfg.model.hidden_dim, m.hidden_dim);
  check("encoder_steps", cfg.model.encoder_steps, m.encoder_steps);
  check("decoder_steps", cfg.model.decoder_steps, m.decoder_steps);
  check("mlp_hidden", cfg.model.mlp_hidden, m.mlp_hidden);
  if (!cfg.vocab.empty()) {
    const AtomVocabulary vocab = AtomVocabulary::load(cfg.vocab);
    if (vocab.fingerprint() != model.vocabulary().fingerprint()) {
      throw ModelMismatchError("vocabulary mismatch: " + cfg.vocab +
                               " differs from the checkpoint vocabulary");
    }
  }
}

}  // namespace ccgvae
