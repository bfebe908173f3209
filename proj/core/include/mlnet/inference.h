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

#ifndef MLNET_INFERENCE_H_
#define MLNET_INFERENCE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlnet/corpus.h"
#include "mlnet/heads.h"
#include "mlnet/metrics.h"
#include "mlnet/model.h"
#include "mlnet/preprocess.h"

namespace mlnet {

enum class DecodeMode { kTopK, kThreshold };

std::string_view to_string(DecodeMode mode);
DecodeMode parse_decode_mode(std::string_view name);

struct PredictedLabelSet {
  std::vector<std::size_t> labels;  // ascending label indices
  DecodeMode mode = DecodeMode::kTopK;
};

struct GlobalThreshold {
  double value = 0.0;
  std::string source_split = "validation";
  double achieved_f1 = 0.0;
};

// Label indices by descending score; equal scores keep ascending index order.
std::vector<std::size_t> rank_labels(const ScoreVector& scores);

// Argmax count in {1..n}; ties resolve to the smaller count.
int decode_count(const CountDistribution& dist);

// The K best-ranked labels, K = decode_count(dist) capped at L.
PredictedLabelSet decode_topk(const ScoreVector& scores, const CountDistribution& dist);

// Labels whose score is strictly greater than the threshold.
PredictedLabelSet decode_threshold(const ScoreVector& scores, double threshold);
inline PredictedLabelSet decode_threshold(const ScoreVector& scores, const GlobalThreshold& t) {
  return decode_threshold(scores, t.value);
}

// Midpoints between consecutive distinct score values, plus min - 1 and
// max + 1, in ascending order.
std::vector<double> threshold_candidates(std::span<const ScoreVector> score_sets);

// Picks the candidate threshold with the highest example-based F1 against
// `gold_sets` (labels interpreted through `vocab`); ties go to the smaller
// threshold. Matching is hierarchical when `hierarchy` is given.
GlobalThreshold search_threshold(std::span<const ScoreVector> score_sets,
                                 std::span<const LabelSet> gold_sets,
                                 const LabelVocabulary& vocab,
                                 const LabelHierarchy* hierarchy = nullptr,
                                 std::string source_split = "validation");

struct Prediction {
  std::string id;
  PredictedLabelSet labels;
  ScoreVector scores;
};

// preprocess -> encode (eval) -> score -> decode. Top-K decoding requires a
// trained count head; threshold decoding requires `threshold`.
Prediction predict(const Document& doc, const ModelBundle& bundle,
                   const EmbeddingTable& embeddings, DecodeMode mode,
                   const GlobalThreshold* threshold = nullptr);

// Decodes already-computed scores / document vectors. Used by batch paths.
Prediction predict_from_input(const std::string& id, const EncoderInput& input,
                              const ModelBundle& bundle, DecodeMode mode,
                              const GlobalThreshold* threshold = nullptr);

// {"id":..., "labels":[...], "scores":{label:score,...}, "mode":...}
std::string prediction_to_json(const Prediction& prediction, const LabelVocabulary& vocab);

std::string threshold_to_json(const GlobalThreshold& t);
GlobalThreshold threshold_from_json(std::string_view text, const std::string& source);

}  // namespace mlnet

#endif  // MLNET_INFERENCE_H_
