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

#ifndef MLNET_METRICS_H_
#define MLNET_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlnet/corpus.h"

namespace mlnet {

enum class Matching { kExact, kHierarchical };

std::string_view to_string(Matching m);
Matching parse_matching(std::string_view name);

struct TruePositives {
  std::size_t precision = 0;  // predicted labels counted as correct
  std::size_t recall = 0;     // gold labels counted as found
};

TruePositives exact_intersection(const LabelSet& gold, const LabelSet& pred);

// A predicted label is a hit when it equals, is an ancestor of, or is a
// descendant of some gold label; a gold label is found under the same rule.
// Each label counts at most once.
TruePositives hierarchical_intersection(const LabelSet& gold, const LabelSet& pred,
                                        const LabelHierarchy& hierarchy);

struct ExampleScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-example precision and recall, including the empty-set conventions:
// both empty scores 1/1; empty prediction with non-empty gold scores
// precision 0; empty gold with non-empty prediction scores recall 0.
ExampleScore score_example(const TruePositives& tp, std::size_t gold_size,
                           std::size_t pred_size);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t p = 0;
  Matching matching = Matching::kExact;
  std::vector<ExampleScore> per_example;
};

// Example-averaged precision and recall; F1 from the averaged values.
// `hierarchy` is required for hierarchical matching.
MetricsReport example_based_metrics(std::span<const LabelSet> gold,
                                    std::span<const LabelSet> pred, Matching matching,
                                    const LabelHierarchy* hierarchy = nullptr,
                                    bool keep_per_example = false);

// f1 = 2PR / (P + R), or 0 when P + R = 0.
double f1_from(double precision, double recall);

// JSON object with keys precision, recall, f1, p, matching and, when
// present, per_example.
std::string to_json(const MetricsReport& report, bool pretty = true);

}  // namespace mlnet

#endif  // MLNET_METRICS_H_
