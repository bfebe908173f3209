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

#include "mlnet/metrics.h"

#include "json.hpp"
#include "mlnet/errors.h"

namespace mlnet {

std::string_view to_string(Matching m) {
  return m == Matching::kExact ? "exact" : "hierarchical";
}

Matching parse_matching(std::string_view name) {
  if (name == "exact") return Matching::kExact;
  if (name == "hierarchical") return Matching::kHierarchical;
  throw UsageError("unknown matching mode '" + std::string(name) + "'");
}

TruePositives exact_intersection(const LabelSet& gold, const LabelSet& pred) {
  std::size_t n = 0;
  for (const auto& label : pred) n += gold.count(label);
  return {n, n};
}

TruePositives hierarchical_intersection(const LabelSet& gold, const LabelSet& pred,
                                        const LabelHierarchy& hierarchy) {
  TruePositives tp;
  for (const auto& q : pred) {
    for (const auto& g : gold) {
      if (hierarchy.related(q, g)) {
        ++tp.precision;
        break;
      }
    }
  }
  for (const auto& g : gold) {
    for (const auto& q : pred) {
      if (hierarchy.related(q, g)) {
        ++tp.recall;
        break;
      }
    }
  }
  return tp;
}

double f1_from(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

ExampleScore score_example(const TruePositives& tp, std::size_t gold_size,
                           std::size_t pred_size) {
  ExampleScore s;
  if (pred_size == 0) {
    s.precision = gold_size == 0 ? 1.0 : 0.0;
  } else {
    s.precision = static_cast<double>(tp.precision) / static_cast<double>(pred_size);
  }
  if (gold_size == 0) {
    s.recall = pred_size == 0 ? 1.0 : 0.0;
  } else {
    s.recall = static_cast<double>(tp.recall) / static_cast<double>(gold_size);
  }
  s.f1 = f1_from(s.precision, s.recall);
  return s;
}

MetricsReport example_based_metrics(std::span<const LabelSet> gold,
                                    std::span<const LabelSet> pred, Matching matching,
                                    const LabelHierarchy* hierarchy, bool keep_per_example) {
  if (gold.size() != pred.size()) {
    throw DataError("metrics: " + std::to_string(gold.size()) + " gold sets but " +
                    std::to_string(pred.size()) + " predicted sets");
  }
  if (gold.empty()) throw DataError("metrics: no examples");
  if (matching == Matching::kHierarchical && hierarchy == nullptr) {
    throw UsageError("hierarchical matching requires a label hierarchy");
  }
  MetricsReport report;
  report.p = gold.size();
  report.matching = matching;
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    TruePositives tp = matching == Matching::kExact
                           ? exact_intersection(gold[i], pred[i])
                           : hierarchical_intersection(gold[i], pred[i], *hierarchy);
    ExampleScore s = score_example(tp, gold[i].size(), pred[i].size());
    precision_sum += s.precision;
    recall_sum += s.recall;
    if (keep_per_example) report.per_example.push_back(s);
  }
  report.precision = precision_sum / static_cast<double>(report.p);
  report.recall = recall_sum / static_cast<double>(report.p);
  report.f1 = f1_from(report.precision, report.recall);
  return report;
}

std::string to_json(const MetricsReport& report, bool pretty) {
  nlohmann::ordered_json j;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["p"] = report.p;
  j["matching"] = std::string(to_string(report.matching));
  if (!report.per_example.empty()) {
    auto& arr = j["per_example"] = nlohmann::ordered_json::array();
    for (const auto& s : report.per_example) {
      arr.push_back({{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
    }
  }
  return pretty ? j.dump(2) : j.dump();
}

}  // namespace mlnet
