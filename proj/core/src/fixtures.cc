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

#include "mlnet/fixtures.h"

#include <algorithm>
#include <string>

namespace mlnet {

GradientFixture make_gradient_fixture(std::uint64_t seed, std::size_t num_docs) {
  Rng rng(Rng::derive(seed, {0xf1c}));
  const int num_labels = 3 + static_cast<int>(rng.below(4));  // 3..6
  std::vector<std::string> labels;
  for (int i = 0; i < num_labels; ++i) labels.push_back("L" + std::to_string(i));

  ModelConfig config;
  config.encoder.embedding_dim = 4;
  config.encoder.word_hidden = 3;
  config.encoder.word_attention = 3;
  config.encoder.sentence_hidden = 3;
  config.encoder.sentence_attention = 2;
  config.encoder.dropout_rate = 0.25;
  config.count_hidden = {4};
  config.max_labels = 3;
  config.preprocess.s_max = 3;
  config.preprocess.t_max = 5;

  GradientFixture fx;
  fx.bundle = init_model(config, LabelVocabulary(labels), seed);
  for (auto& t : collect_tensors(fx.bundle)) {
    for (Eigen::Index j = 0; j < t.size(); ++j) t.data[j] = rng.uniform(-0.5, 0.5);
  }
  for (Eigen::Index v = 0; v < fx.bundle.label_head.bias.size(); ++v) {
    fx.bundle.label_head.bias(v) = rng.uniform(0.3, 0.9);
  }

  for (std::size_t d = 0; d < num_docs; ++d) {
    LabeledInput ex;
    ex.id = "fixture-" + std::to_string(d);
    const int s_max = config.preprocess.s_max;
    const int t_max = config.preprocess.t_max;
    ex.input.sentences.assign(s_max, Eigen::MatrixXd::Zero(config.encoder.embedding_dim, t_max));
    ex.input.sentence_mask.assign(s_max, 0);
    ex.input.token_mask.assign(s_max, std::vector<std::uint8_t>(t_max, 0));
    const int n_sent = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(s_max)));
    for (int s = 0; s < n_sent; ++s) {
      const int n_tok = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(t_max)));
      ex.input.sentence_mask[s] = 1;
      for (int t = 0; t < n_tok; ++t) {
        ex.input.token_mask[s][t] = 1;
        for (int k = 0; k < config.encoder.embedding_dim; ++k) {
          ex.input.sentences[s](k, t) = rng.uniform(-1.0, 1.0);
        }
      }
    }
    // Between one and L-1 gold labels so the pair set is never empty.
    const std::size_t n_gold = 1 + rng.below(static_cast<std::size_t>(num_labels - 1));
    for (std::size_t pick : rng.sample_without_replacement(num_labels, n_gold)) {
      ex.gold.push_back(pick);
    }
    std::sort(ex.gold.begin(), ex.gold.end());
    ex.raw_count = ex.gold.size();
    fx.examples.push_back(std::move(ex));
  }
  return fx;
}

}  // namespace mlnet
