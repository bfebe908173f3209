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

#include "mlnet/inference.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "json.hpp"
#include "mlnet/encoder.h"
#include "mlnet/errors.h"

namespace mlnet {

std::string_view to_string(DecodeMode mode) {
  return mode == DecodeMode::kTopK ? "topk" : "threshold";
}

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "topk") return DecodeMode::kTopK;
  if (name == "threshold") return DecodeMode::kThreshold;
  throw UsageError("unknown decode mode '" + std::string(name) + "'");
}

std::vector<std::size_t> rank_labels(const ScoreVector& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores(a) > scores(b); });
  return order;
}

int decode_count(const CountDistribution& dist) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < dist.size(); ++k) {
    if (dist(k) > dist(best)) best = k;
  }
  return static_cast<int>(best) + 1;
}

PredictedLabelSet decode_topk(const ScoreVector& scores, const CountDistribution& dist) {
  const std::size_t k =
      std::min<std::size_t>(static_cast<std::size_t>(decode_count(dist)),
                            static_cast<std::size_t>(scores.size()));
  std::vector<std::size_t> ranked = rank_labels(scores);
  PredictedLabelSet out{{ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k)},
                        DecodeMode::kTopK};
  std::sort(out.labels.begin(), out.labels.end());
  return out;
}

PredictedLabelSet decode_threshold(const ScoreVector& scores, double threshold) {
  PredictedLabelSet out{{}, DecodeMode::kThreshold};
  for (Eigen::Index v = 0; v < scores.size(); ++v) {
    if (scores(v) > threshold) out.labels.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

namespace {

// Midpoint strictly below `hi`, so that scores equal to `hi` pass a strict
// `>` test.
double midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (mid >= hi) mid = lo;
  return mid;
}

std::vector<double> distinct_scores(std::span<const ScoreVector> score_sets) {
  std::vector<double> values;
  for (const auto& s : score_sets) values.insert(values.end(), s.data(), s.data() + s.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::vector<double> candidates_from(const std::vector<double>& xs) {
  std::vector<double> out;
  if (xs.empty()) return {0.0};
  out.reserve(xs.size() + 1);
  out.push_back(xs.front() - 1.0);
  for (std::size_t j = 1; j < xs.size(); ++j) out.push_back(midpoint(xs[j - 1], xs[j]));
  out.push_back(xs.back() + 1.0);
  return out;
}

// Vocabulary indices related to each gold label of one document.
std::vector<std::vector<std::size_t>> related_indices(
    const LabelSet& gold, const LabelVocabulary& vocab, const LabelHierarchy* hierarchy,
    const std::multimap<std::string, std::string>& children) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& g : gold) {
    std::vector<std::size_t> rel;
    auto add = [&](const std::string& label) {
      if (auto idx = vocab.index_of(label)) rel.push_back(*idx);
    };
    add(g);
    if (hierarchy != nullptr) {
      for (const auto& a : hierarchy->ancestors(g)) add(a);
      std::vector<std::string> stack{g};
      while (!stack.empty()) {
        std::string cur = std::move(stack.back());
        stack.pop_back();
        auto [b, e] = children.equal_range(cur);
        for (auto it = b; it != e; ++it) {
          add(it->second);
          stack.push_back(it->second);
        }
      }
    }
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
    out.push_back(std::move(rel));
  }
  return out;
}

}  // namespace

std::vector<double> threshold_candidates(std::span<const ScoreVector> score_sets) {
  return candidates_from(distinct_scores(score_sets));
}

GlobalThreshold search_threshold(std::span<const ScoreVector> score_sets,
                                 std::span<const LabelSet> gold_sets,
                                 const LabelVocabulary& vocab, const LabelHierarchy* hierarchy,
                                 std::string source_split) {
  if (score_sets.empty()) throw DataError("threshold search: no examples");
  if (score_sets.size() != gold_sets.size()) {
    throw DataError("threshold search: score and gold counts differ");
  }
  for (const auto& s : score_sets) {
    if (s.size() != static_cast<Eigen::Index>(vocab.size())) {
      throw DimensionError("threshold search: score vector length does not match vocabulary");
    }
  }
  const std::size_t n_docs = score_sets.size();
  const std::vector<double> xs = distinct_scores(score_sets);
  const std::vector<double> candidates = candidates_from(xs);

  std::multimap<std::string, std::string> children;
  if (hierarchy != nullptr) {
    for (const auto& [child, parent] : hierarchy->parent_map()) children.emplace(parent, child);
  }

  // Per document: for each vocabulary index, the gold positions it relates
  // to. An index relating to no gold label is a false positive.
  struct DocState {
    std::size_t gold_size = 0;
    std::unordered_map<std::size_t, std::vector<std::size_t>> covers;  // by label index
    std::vector<int> covered;                      // by gold position
    std::size_t pred = 0;
    std::size_t tp_precision = 0;
    std::size_t tp_recall = 0;
    ExampleScore score;
  };
  std::vector<DocState> docs(n_docs);
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  for (std::size_t i = 0; i < n_docs; ++i) {
    DocState& d = docs[i];
    d.gold_size = gold_sets[i].size();
    auto rel = related_indices(gold_sets[i], vocab, hierarchy, children);
    for (std::size_t g = 0; g < rel.size(); ++g) {
      for (std::size_t v : rel[g]) d.covers[v].push_back(g);
    }
    d.covered.assign(d.gold_size, 0);
    d.score = score_example({}, d.gold_size, 0);
    precision_sum += d.score.precision;
    recall_sum += d.score.recall;
  }

  // Entries sorted by descending score; lowering the threshold past each
  // distinct value admits one group of entries.
  struct Entry {
    double score;
    std::size_t doc;
    std::size_t label;
  };
  std::vector<Entry> entries;
  entries.reserve(n_docs * vocab.size());
  for (std::size_t i = 0; i < n_docs; ++i) {
    for (std::size_t v = 0; v < vocab.size(); ++v) {
      entries.push_back({score_sets[i](static_cast<Eigen::Index>(v)), i, v});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  std::vector<double> approx(candidates.size(), 0.0);
  const double p = static_cast<double>(n_docs);
  approx.back() = f1_from(precision_sum / p, recall_sum / p);
  std::size_t cursor = 0;
  for (std::size_t j = xs.size(); j-- > 0;) {
    while (cursor < entries.size() && entries[cursor].score >= xs[j]) {
      const Entry& e = entries[cursor++];
      DocState& d = docs[e.doc];
      ++d.pred;
      if (auto it = d.covers.find(e.label); it != d.covers.end()) {
        ++d.tp_precision;
        for (std::size_t g : it->second) {
          if (d.covered[g]++ == 0) ++d.tp_recall;
        }
      }
      ExampleScore next = score_example({d.tp_precision, d.tp_recall}, d.gold_size, d.pred);
      precision_sum += next.precision - d.score.precision;
      recall_sum += next.recall - d.score.recall;
      d.score = next;
    }
    approx[j] = f1_from(precision_sum / p, recall_sum / p);
  }

  // The incremental sums drift in the last bits; settle near-ties with an
  // exact evaluation.
  const double best_approx = *std::max_element(approx.begin(), approx.end());
  const Matching matching = hierarchy != nullptr ? Matching::kHierarchical : Matching::kExact;
  GlobalThreshold best;
  best.source_split = std::move(source_split);
  bool found = false;
  std::vector<LabelSet> predicted(n_docs);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (approx[c] < best_approx - 1e-9) continue;
    for (std::size_t i = 0; i < n_docs; ++i) {
      predicted[i] = vocab.decode(decode_threshold(score_sets[i], candidates[c]).labels);
    }
    const double f1 =
        example_based_metrics(gold_sets, predicted, matching, hierarchy).f1;
    if (!found || f1 > best.achieved_f1) {
      best.value = candidates[c];
      best.achieved_f1 = f1;
      found = true;
    }
  }
  return best;
}

Prediction predict_from_input(const std::string& id, const EncoderInput& input,
                              const ModelBundle& bundle, DecodeMode mode,
                              const GlobalThreshold* threshold) {
  if (mode == DecodeMode::kTopK && !bundle.count_head_trained) {
    throw UsageError("top-K decoding needs a trained count head; this model skipped stage 2");
  }
  if (mode == DecodeMode::kThreshold && threshold == nullptr) {
    throw UsageError("threshold decoding requires a threshold");
  }
  Prediction out;
  out.id = id;
  DocumentVector x = encode_document(input, bundle.encoder, Mode::kEval);
  out.scores = score_labels(x, bundle.label_head);
  if (mode == DecodeMode::kTopK) {
    out.labels = decode_topk(out.scores, predict_count_distribution(x, bundle.count_head));
  } else {
    out.labels = decode_threshold(out.scores, *threshold);
  }
  return out;
}

Prediction predict(const Document& doc, const ModelBundle& bundle,
                   const EmbeddingTable& embeddings, DecodeMode mode,
                   const GlobalThreshold* threshold) {
  EncoderInput input = prepare_input(doc, embeddings, bundle.config.preprocess);
  return predict_from_input(doc.id, input, bundle, mode, threshold);
}

std::string prediction_to_json(const Prediction& prediction, const LabelVocabulary& vocab) {
  nlohmann::ordered_json j;
  j["id"] = prediction.id;
  j["labels"] = nlohmann::ordered_json::array();
  for (std::size_t v : prediction.labels.labels) j["labels"].push_back(vocab.label(v));
  auto& scores = j["scores"] = nlohmann::ordered_json::object();
  for (Eigen::Index v = 0; v < prediction.scores.size(); ++v) {
    scores[vocab.label(static_cast<std::size_t>(v))] = prediction.scores(v);
  }
  j["mode"] = std::string(to_string(prediction.labels.mode));
  return j.dump();
}

std::string threshold_to_json(const GlobalThreshold& t) {
  nlohmann::ordered_json j;
  j["value"] = t.value;
  j["achieved_f1"] = t.achieved_f1;
  j["source_split"] = t.source_split;
  return j.dump(2);
}

GlobalThreshold threshold_from_json(std::string_view text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, std::string("malformed threshold JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("value") || !j["value"].is_number()) {
    throw ParseError(source, 0, "threshold JSON needs a numeric 'value'");
  }
  GlobalThreshold t;
  t.value = j["value"].get<double>();
  if (!std::isfinite(t.value)) throw ParseError(source, 0, "threshold must be finite");
  if (j.contains("achieved_f1") && j["achieved_f1"].is_number()) {
    t.achieved_f1 = j["achieved_f1"].get<double>();
  }
  if (j.contains("source_split") && j["source_split"].is_string()) {
    t.source_split = j["source_split"].get<std::string>();
  }
  return t;
}

}  // namespace mlnet
