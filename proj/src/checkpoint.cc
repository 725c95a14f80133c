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

#include "ccgvae/checkpoint.h"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ccgvae {

namespace {

constexpr std::string_view kMagic = "CCGVAE-CHECKPOINT";

std::string escape(std::string_view v) {
  std::string out;
  for (const char c : v) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '\\') {
      out += v[i];
      continue;
    }
    if (++i == v.size()) throw CheckpointError("dangling escape in metadata");
    if (v[i] == 'n') {
      out += '\n';
    } else if (v[i] == '\\') {
      out += '\\';
    } else {
      throw CheckpointError("bad escape in metadata");
    }
  }
  return out;
}

bool validName(std::string_view s) {
  if (s.empty()) return false;
  for (const char c : s) {
    if (c == '=' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view line() {
    const auto eol = bytes_.find('\n', pos_);
    if (eol == std::string_view::npos) {
      throw CheckpointError("truncated checkpoint header");
    }
    const std::string_view out = bytes_.substr(pos_, eol - pos_);
    pos_ = eol + 1;
    return out;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
T number(std::string_view s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw CheckpointError("bad number '" + std::string(s) + "' in header");
  }
  return v;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t s = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > s) out.push_back(line.substr(s, i - s));
  }
  return out;
}

std::size_t countAfter(std::string_view line, std::string_view keyword) {
  const auto f = fields(line);
  if (f.size() != 2 || f[0] != keyword) {
    throw CheckpointError("expected '" + std::string(keyword) + " <n>'");
  }
  return number<std::size_t>(f[1]);
}

}  // namespace

void Checkpoint::setMeta(const std::string& key, std::string value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(key, std::move(value));
}

const std::string* Checkpoint::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

const Tensor* Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

std::string serializeCheckpoint(const Checkpoint& ckpt) {
  std::string header = std::string(kMagic) + ' ' +
                       std::to_string(kCheckpointVersion) + '\n';
  header += "metadata " + std::to_string(ckpt.metadata.size()) + '\n';
  for (const auto& [k, v] : ckpt.metadata) {
    if (!validName(k)) throw CheckpointError("bad metadata key '" + k + "'");
    header += k + '=' + escape(v) + '\n';
  }
  header += "tensors " + std::to_string(ckpt.tensors.size()) + '\n';
  std::size_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    if (!validName(t.name)) {
      throw CheckpointError("bad tensor name '" + t.name + "'");
    }
    header += t.name + ' ' + std::to_string(t.value.rows()) + ' ' +
              std::to_string(t.value.cols()) + ' ' + std::to_string(offset) +
              '\n';
    offset += t.value.size() * 4;
  }
  header += "payload " + std::to_string(offset) + '\n';

  std::string out = std::move(header);
  out.reserve(out.size() + offset);
  for (const auto& t : ckpt.tensors) {
    for (const float f : t.value.values()) {
      const auto bits = std::bit_cast<std::uint32_t>(f);
      for (int b = 0; b < 4; ++b) {
        out += static_cast<char>((bits >> (8 * b)) & 0xFF);
      }
    }
  }
  return out;
}

Checkpoint parseCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  {
    const auto f = fields(r.line());
    if (f.size() != 2 || f[0] != kMagic) {
      throw CheckpointError("not a checkpoint file (bad magic)");
    }
    const int version = number<int>(f[1]);
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " +
                            std::to_string(version));
    }
  }
  Checkpoint ckpt;
  const std::size_t n_meta = countAfter(r.line(), "metadata");
  for (std::size_t i = 0; i < n_meta; ++i) {
    const std::string_view line = r.line();
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw CheckpointError("metadata line without '='");
    }
    ckpt.metadata.emplace_back(std::string(line.substr(0, eq)),
                               unescape(line.substr(eq + 1)));
  }
  struct Entry {
    std::string name;
    int rows, cols;
    std::size_t offset;
  };
  std::vector<Entry> dir;
  const std::size_t n_tensors = countAfter(r.line(), "tensors");
  for (std::size_t i = 0; i < n_tensors; ++i) {
    const auto f = fields(r.line());
    if (f.size() != 4) throw CheckpointError("bad tensor directory line");
    dir.push_back({std::string(f[0]), number<int>(f[1]), number<int>(f[2]),
                   number<std::size_t>(f[3])});
  }
  const std::size_t payload = countAfter(r.line(), "payload");
  const std::size_t base = r.pos();
  if (bytes.size() - base != payload) {
    throw CheckpointError("payload size mismatch: header says " +
                          std::to_string(payload) + ", file has " +
                          std::to_string(bytes.size() - base));
  }
  for (const auto& e : dir) {
    if (e.rows < 0 || e.cols < 0) throw CheckpointError("negative shape");
    const std::size_t n = static_cast<std::size_t>(e.rows) * e.cols;
    if (e.offset > payload || n * 4 > payload - e.offset) {
      throw CheckpointError("tensor " + e.name + " exceeds payload");
    }
    std::vector<float> data(n);
    const auto* p =
        reinterpret_cast<const unsigned char*>(bytes.data() + base + e.offset);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(p[4 * i + b]) << (8 * b);
      }
      data[i] = std::bit_cast<float>(bits);
    }
    ckpt.tensors.push_back({e.name, Tensor(e.rows, e.cols, std::move(data))});
  }
  return ckpt;
}

void writeCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = serializeCheckpoint(ckpt);
  // Write then rename so a crash never leaves a half-written checkpoint.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into " + path);
}

Checkpoint readCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parseCheckpoint(buf.str());
}

}  // namespace ccgvae
