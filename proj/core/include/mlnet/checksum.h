// Copyright 2026 The MLNet Authors.
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

#ifndef MLNET_CHECKSUM_H_
#define MLNET_CHECKSUM_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mlnet {

// 64-bit FNV-1a, incremental.
class Fnv1a64 {
 public:
  void update(std::span<const std::byte> bytes);
  void update(std::string_view text);
  void update_doubles(std::span<const double> values);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace mlnet

#endif  // MLNET_CHECKSUM_H_
