// Copyright 2026 The invlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Attacker checkpoints: a plain-text manifest (sorted key=value lines) and
// a tensor blob of named float32 matrices.

#ifndef INVLAB_CHECKPOINT_H_
#define INVLAB_CHECKPOINT_H_

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <type_traits>

#include "invlab/nn/tensor.h"

namespace invlab {

class CheckpointManifest {
 public:
  void Set(const std::string& key, const std::string& value);
  void Set(const std::string& key, const char* value) { Set(key, std::string(value)); }
  // Integers verbatim; floating point with round-trip precision.
  template <typename V>
    requires std::is_arithmetic_v<V>
  void Set(const std::string& key, V value) {
    if constexpr (std::is_floating_point_v<V>) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(value));
      Set(key, std::string(buf));
    } else {
      Set(key, std::to_string(value));
    }
  }

  bool Has(const std::string& key) const { return fields_.count(key) > 0; }
  // Throws CheckpointMismatch for a missing key.
  const std::string& Get(const std::string& key) const;
  int GetInt(const std::string& key) const;

  const std::map<std::string, std::string>& fields() const { return fields_; }

  std::string Serialize() const;
  static CheckpointManifest Parse(const std::string& text,
                                  const std::string& source = "manifest");

  // Throws CheckpointMismatch when the recorded vocabulary hash or victim
  // id differ from the given ones.
  void Verify(const std::string& vocab_hash, const std::string& victim_id) const;

 private:
  std::map<std::string, std::string> fields_;
};

// Writes `<dir>/checkpoint.manifest` and `<dir>/checkpoint.bin`. Each file
// is written to a temporary name and renamed into place.
void SaveCheckpoint(const std::filesystem::path& dir,
                    const CheckpointManifest& manifest,
                    const nn::ParameterRefs<float>& tensors);

CheckpointManifest LoadCheckpointManifest(const std::filesystem::path& dir);

// Fills `tensors` from the blob. Names, order and shapes must match what
// was saved; otherwise CheckpointMismatch.
void LoadCheckpointTensors(const std::filesystem::path& dir,
                           const nn::ParameterRefs<float>& tensors);

bool CheckpointExists(const std::filesystem::path& dir);

}  // namespace invlab

#endif  // INVLAB_CHECKPOINT_H_
