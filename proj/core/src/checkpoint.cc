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

#include "invlab/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "invlab/error.h"

namespace invlab {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'I', 'N', 'V', 'L', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written in native little-endian order");

void WriteU32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t ReadU32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CheckpointMismatch("truncated checkpoint blob");
  return v;
}

void WriteAtomically(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointMismatch("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void CheckpointManifest::Set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos ||
      value.find('\n') != std::string::npos) {
    throw InvalidArgument("manifest keys and values must be single-line");
  }
  fields_[key] = value;
}

const std::string& CheckpointManifest::Get(const std::string& key) const {
  auto it = fields_.find(key);
  if (it == fields_.end()) {
    throw CheckpointMismatch("checkpoint manifest lacks '" + key + "'");
  }
  return it->second;
}

int CheckpointManifest::GetInt(const std::string& key) const {
  const std::string& v = Get(key);
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw CheckpointMismatch("manifest field '" + key + "' is not an integer");
  }
}

std::string CheckpointManifest::Serialize() const {
  std::string out;
  for (const auto& [k, v] : fields_) out += k + "=" + v + "\n";
  return out;
}

CheckpointManifest CheckpointManifest::Parse(const std::string& text,
                                             const std::string& source) {
  CheckpointManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError(source, line_no, "expected key=value");
    }
    m.fields_[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

void CheckpointManifest::Verify(const std::string& vocab_hash,
                                const std::string& victim_id) const {
  if (Get("vocab_hash") != vocab_hash) {
    throw CheckpointMismatch("checkpoint was trained with vocabulary " +
                             Get("vocab_hash") + ", current is " + vocab_hash);
  }
  if (Get("victim_id") != victim_id) {
    throw CheckpointMismatch("checkpoint was trained against victim " +
                             Get("victim_id") + ", current is " + victim_id);
  }
}

void SaveCheckpoint(const fs::path& dir, const CheckpointManifest& manifest,
                    const nn::ParameterRefs<float>& tensors) {
  fs::create_directories(dir);
  std::ostringstream blob(std::ios::binary);
  blob.write(kMagic, sizeof(kMagic));
  WriteU32(blob, static_cast<std::uint32_t>(tensors.size()));
  for (const auto* p : tensors) {
    WriteU32(blob, static_cast<std::uint32_t>(p->name.size()));
    blob.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    WriteU32(blob, static_cast<std::uint32_t>(p->value.rows()));
    WriteU32(blob, static_cast<std::uint32_t>(p->value.cols()));
    blob.write(reinterpret_cast<const char*>(p->value.data()),
               static_cast<std::streamsize>(p->value.size() * sizeof(float)));
  }
  WriteAtomically(dir / "checkpoint.bin", blob.str());
  WriteAtomically(dir / "checkpoint.manifest", manifest.Serialize());
}

CheckpointManifest LoadCheckpointManifest(const fs::path& dir) {
  const fs::path path = dir / "checkpoint.manifest";
  return CheckpointManifest::Parse(ReadAll(path), path.string());
}

void LoadCheckpointTensors(const fs::path& dir,
                           const nn::ParameterRefs<float>& tensors) {
  std::istringstream in(ReadAll(dir / "checkpoint.bin"), std::ios::binary);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointMismatch("not an invlab checkpoint blob");
  }
  const std::uint32_t count = ReadU32(in);
  if (count != tensors.size()) {
    throw CheckpointMismatch("checkpoint holds " + std::to_string(count) +
                             " tensors, model expects " +
                             std::to_string(tensors.size()));
  }
  for (auto* p : tensors) {
    std::string name(ReadU32(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const std::uint32_t rows = ReadU32(in);
    const std::uint32_t cols = ReadU32(in);
    if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
      throw CheckpointMismatch("tensor '" + name + "' (" + std::to_string(rows) +
                               "x" + std::to_string(cols) +
                               ") does not match model tensor '" + p->name + "'");
    }
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(float)));
    if (!in) throw CheckpointMismatch("truncated checkpoint blob");
  }
}

bool CheckpointExists(const fs::path& dir) {
  return fs::exists(dir / "checkpoint.manifest") &&
         fs::exists(dir / "checkpoint.bin");
}

}  // namespace invlab
