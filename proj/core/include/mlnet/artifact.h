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

#ifndef MLNET_ARTIFACT_H_
#define MLNET_ARTIFACT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mlnet/model.h"

namespace mlnet {

inline constexpr std::uint32_t kArtifactVersion = 1;

// Model artifact layout (all integers little-endian):
//
//   "MLNETART"                 8-byte magic
//   u32 format version
//   u64 header length, then a JSON metadata header: config, vocabulary,
//       stop words, seed, embedding/hierarchy digests, training flags,
//       and per-tensor name/shape/checksum plus a payload checksum
//   u64 tensor count, then per tensor:
//       u32 name length, name bytes, u64 rows, u64 cols,
//       rows*cols IEEE-754 doubles in row-major order
//
// Serialization is canonical: save -> load -> save reproduces the bytes.
std::string serialize_model(const ModelBundle& bundle);

// Verifies magic, version, per-tensor and payload checksums, and shape
// consistency. Throws DataError on any mismatch.
ModelBundle deserialize_model(std::string_view bytes, const std::string& source = "<memory>");

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace mlnet

#endif  // MLNET_ARTIFACT_H_
