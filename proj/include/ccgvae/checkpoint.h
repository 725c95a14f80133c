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

#ifndef CCGVAE_CHECKPOINT_H_
#define CCGVAE_CHECKPOINT_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccgvae/tensor.h"

namespace ccgvae {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Text header (format version, key=value metadata, tensor directory with
// name, shape and byte offset) followed by little-endian float32 payloads:
//
//   CCGVAE-CHECKPOINT 1
//   metadata <n>
//   <key>=<value>          values escape '\\' and newlines
//   tensors <n>
//   <name> <rows> <cols> <offset>
//   payload <bytes>
//   <raw bytes>
struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<NamedTensor> tensors;

  void setMeta(const std::string& key, std::string value);
  // nullptr when absent.
  const std::string* meta(std::string_view key) const;
  const Tensor* tensor(std::string_view name) const;
};

inline constexpr int kCheckpointVersion = 1;

std::string serializeCheckpoint(const Checkpoint& ckpt);
Checkpoint parseCheckpoint(std::string_view bytes);
void writeCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint readCheckpoint(const std::string& path);

}  // namespace ccgvae

#endif  // CCGVAE_CHECKPOINT_H_
