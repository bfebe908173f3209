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

#ifndef MLNET_MODEL_H_
#define MLNET_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mlnet/checksum.h"
#include "mlnet/corpus.h"
#include "mlnet/encoder.h"
#include "mlnet/heads.h"
#include "mlnet/preprocess.h"

namespace mlnet {

struct ModelConfig {
  EncoderConfig encoder;
  std::vector<int> count_hidden = {128, 128, 64};
  int max_labels = 5;
  PreprocessConfig preprocess;
};

// Everything needed to score and decode a raw document, apart from the
// embedding table (which stays external and is matched by digest).
struct ModelBundle {
  ModelConfig config;
  LabelVocabulary vocab;
  EncoderParams encoder;
  LabelScoreHead label_head;
  CountHead count_head;
  bool stage1_trained = false;
  bool count_head_trained = false;
  std::uint64_t seed = 0;
  std::string embedding_digest;
  std::string hierarchy_digest;

  int num_labels() const { return static_cast<int>(vocab.size()); }
  // Throws DimensionError if any widths disagree.
  void validate() const;
};

// Random initialization from a seed. The vocabulary must be non-empty.
ModelBundle init_model(const ModelConfig& config, LabelVocabulary vocab, std::uint64_t seed);

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, ModelBundle>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  for_each_tensor(p.encoder, join_name(prefix, "encoder"), f);
  for_each_tensor(p.label_head, join_name(prefix, "label_head"), f);
  for_each_tensor(p.count_head, join_name(prefix, "count_head"), f);
}

// Checksum over tensor names, shapes and values.
template <class P>
std::string params_checksum(const P& params) {
  Fnv1a64 h;
  for (const auto& t : collect_tensors(params)) {
    h.update(t.name);
    h.update(std::to_string(t.rows) + "x" + std::to_string(t.cols));
    h.update_doubles(std::span<const double>(t.data, static_cast<std::size_t>(t.size())));
  }
  return h.hex();
}

}  // namespace mlnet

#endif  // MLNET_MODEL_H_
