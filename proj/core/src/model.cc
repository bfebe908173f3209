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

#include "mlnet/model.h"

#include "mlnet/errors.h"

namespace mlnet {

void ModelBundle::validate() const {
  const int d = encoder.output_dim();
  if (encoder.sent_rnn.input_dim != encoder.word_rnn.output_dim()) {
    throw DimensionError("sentence encoder input does not match word encoder output");
  }
  if (label_head.num_labels() != num_labels()) {
    throw DimensionError("label head has " + std::to_string(label_head.num_labels()) +
                         " rows but the vocabulary has " + std::to_string(num_labels()) +
                         " labels");
  }
  if (label_head.input_dim() != d || count_head.input_dim() != d) {
    throw DimensionError("head input width does not match document vector width");
  }
  if (count_head.max_labels() != config.max_labels) {
    throw DimensionError("count head output width does not match maximum permitted labels");
  }
}

ModelBundle init_model(const ModelConfig& config, LabelVocabulary vocab, std::uint64_t seed) {
  if (vocab.empty()) throw DataError("cannot build a model over an empty label vocabulary");
  if (config.max_labels < 1) throw UsageError("maximum permitted labels must be at least 1");
  ModelBundle bundle;
  bundle.config = config;
  bundle.vocab = std::move(vocab);
  bundle.seed = seed;
  // Separate streams keep each component's initialization independent of
  // the others' sizes.
  Rng encoder_rng(Rng::derive(seed, {1}));
  Rng label_rng(Rng::derive(seed, {2}));
  Rng count_rng(Rng::derive(seed, {3}));
  bundle.encoder = init_encoder(config.encoder, encoder_rng);
  const int d = bundle.encoder.output_dim();
  bundle.label_head = init_label_head(bundle.num_labels(), d, label_rng);
  bundle.count_head = init_count_head(d, config.count_hidden, config.max_labels, count_rng);
  return bundle;
}

}  // namespace mlnet
