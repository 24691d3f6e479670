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

#ifndef INVLAB_HASH_H_
#define INVLAB_HASH_H_

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace invlab {

// 64-bit FNV-1a, used for content fingerprints (corpus, vocabulary,
// config). Not a security primitive.
class Fnv1a {
 public:
  Fnv1a& Update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint64_t Digest() const { return state_; }
  std::string HexDigest() const { return ToHex(state_); }

  static std::string ToHex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(value));
    return buf;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace invlab

#endif  // INVLAB_HASH_H_
