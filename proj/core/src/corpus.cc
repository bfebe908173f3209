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

#include "mlnet/corpus.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json.hpp"
#include "mlnet/checksum.h"
#include "mlnet/errors.h"
#include "mlnet/random.h"
#include "io_util.h"

namespace mlnet {

using nlohmann::json;

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  throw UsageError("unknown corpus format '" + std::string(name) + "'");
}

std::vector<Document> parse_corpus_jsonl(std::string_view text,
                                         const std::string& source) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  auto lines = internal::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (internal::trim(lines[i]).empty()) continue;
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(source, lineno, "record is not an object");
    auto require = [&](const char* key) -> const json& {
      auto it = record.find(key);
      if (it == record.end()) {
        throw ParseError(source, lineno, std::string("missing key '") + key + "'");
      }
      return *it;
    };
    const json& id = require("id");
    const json& body = require("text");
    const json& labels = require("labels");
    if (!id.is_string()) throw ParseError(source, lineno, "'id' must be a string");
    if (!body.is_string()) throw ParseError(source, lineno, "'text' must be a string");
    if (!labels.is_array()) throw ParseError(source, lineno, "'labels' must be an array");
    Document doc;
    doc.id = id.get<std::string>();
    doc.text = body.get<std::string>();
    for (const json& label : labels) {
      if (!label.is_string()) {
        throw ParseError(source, lineno, "labels must be strings");
      }
      doc.gold_labels.insert(label.get<std::string>());
    }
    if (!seen.insert(doc.id).second) {
      throw ParseError(source, lineno, "duplicate document id '" + doc.id + "'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  CorpusFormat format) {
  switch (format) {
    case CorpusFormat::kJsonl:
      return parse_corpus_jsonl(internal::read_text_file(path), path.string());
  }
  throw UsageError("unsupported corpus format");
}

std::string to_jsonl(const std::vector<Document>& docs) {
  std::string out;
  for (const Document& doc : docs) {
    json record;
    record["id"] = doc.id;
    record["text"] = doc.text;
    record["labels"] = json::array();
    for (const auto& label : doc.gold_labels) record["labels"].push_back(label);
    out += record.dump();
    out += '\n';
  }
  return out;
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
}

std::optional<std::size_t> LabelVocabulary::index_of(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> LabelVocabulary::encode(const LabelSet& labels,
                                                 std::size_t* unknown) const {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    if (auto idx = index_of(label)) {
      out.push_back(*idx);
    } else if (unknown != nullptr) {
      ++*unknown;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LabelSet LabelVocabulary::decode(const std::vector<std::size_t>& indices) const {
  LabelSet out;
  for (std::size_t i : indices) out.insert(label(i));
  return out;
}

LabelVocabulary build_vocabulary(const std::vector<Document>& docs) {
  std::set<std::string> all;
  for (const Document& doc : docs) all.insert(doc.gold_labels.begin(), doc.gold_labels.end());
  return LabelVocabulary(std::vector<std::string>(all.begin(), all.end()));
}

LabelHierarchy LabelHierarchy::from_parent_map(
    std::map<std::string, std::string> parent_of) {
  LabelHierarchy h;
  for (auto& [child, parent] : parent_of) {
    h.nodes_.insert(child);
    h.nodes_.insert(parent);
    h.parent_of_.emplace(child, parent);
  }
  // Walk up from every node; revisiting a node on the current walk is a
  // cycle. Nodes proven to reach a root are memoized.
  std::set<std::string, std::less<>> rooted;
  for (const auto& start : h.nodes_) {
    std::set<std::string, std::less<>> path;
    std::string cur = start;
    while (!rooted.contains(cur)) {
      if (!path.insert(cur).second) {
        throw DataError("label hierarchy contains a cycle through '" + cur + "'");
      }
      auto it = h.parent_of_.find(cur);
      if (it == h.parent_of_.end()) break;
      cur = it->second;
    }
    rooted.insert(path.begin(), path.end());
  }
  return h;
}

bool LabelHierarchy::contains(std::string_view label) const {
  return nodes_.find(label) != nodes_.end();
}

std::optional<std::string> LabelHierarchy::parent(std::string_view label) const {
  auto it = parent_of_.find(label);
  if (it == parent_of_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> LabelHierarchy::ancestors(std::string_view label) const {
  std::vector<std::string> out;
  auto it = parent_of_.find(label);
  while (it != parent_of_.end()) {
    out.push_back(it->second);
    it = parent_of_.find(it->second);
  }
  return out;
}

bool LabelHierarchy::is_ancestor(std::string_view ancestor,
                                 std::string_view label) const {
  auto it = parent_of_.find(label);
  while (it != parent_of_.end()) {
    if (it->second == ancestor) return true;
    it = parent_of_.find(it->second);
  }
  return false;
}

bool LabelHierarchy::related(std::string_view x, std::string_view y) const {
  return x == y || is_ancestor(x, y) || is_ancestor(y, x);
}

std::string LabelHierarchy::digest() const {
  Fnv1a64 h;
  for (const auto& [child, parent] : parent_of_) {
    h.update(child);
    h.update(std::string_view("\t", 1));
    h.update(parent);
    h.update(std::string_view("\n", 1));
  }
  return h.hex();
}

LabelHierarchy parse_hierarchy_tsv(std::string_view text, const std::string& source) {
  std::map<std::string, std::string> parent_of;
  auto lines = internal::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (internal::trim(line).empty() || line.front() == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw ParseError(source, i + 1, "expected 'child<TAB>parent'");
    }
    std::string child(internal::trim(line.substr(0, tab)));
    std::string parent(internal::trim(line.substr(tab + 1)));
    if (child.empty() || parent.empty()) {
      throw ParseError(source, i + 1, "empty label in edge");
    }
    auto [it, inserted] = parent_of.emplace(child, parent);
    if (!inserted && it->second != parent) {
      throw ParseError(source, i + 1,
                       "label '" + child + "' has two parents ('" + it->second +
                           "' and '" + parent + "')");
    }
  }
  return LabelHierarchy::from_parent_map(std::move(parent_of));
}

LabelHierarchy load_hierarchy(const std::filesystem::path& path) {
  return parse_hierarchy_tsv(internal::read_text_file(path), path.string());
}

LabelSet augment_labels(const LabelSet& labels, const LabelHierarchy& hierarchy) {
  LabelSet out = labels;
  for (const auto& label : labels) {
    for (auto& a : hierarchy.ancestors(label)) out.insert(std::move(a));
  }
  return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  // The epsilon absorbs representation error such as 0.7 * 1580 landing a
  // hair below 1106.
  auto part = [n](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  std::size_t train = part(ratios.train);
  std::size_t validation = part(ratios.validation);
  if (train + validation > n) validation = n - train;
  return {train, validation, n - train - validation};
}

DatasetSplit split_corpus(const std::vector<Document>& docs,
                          const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw UsageError("split ratios must be non-negative");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw UsageError("split ratios must sum to 1");
  }
  if (docs.size() < 3) {
    throw DataError("cannot split fewer than 3 documents");
  }
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(Rng::derive(seed, {0x5b117}));
  rng.shuffle(order);

  auto [n_train, n_val, n_test] = split_sizes(docs.size(), ratios);
  DatasetSplit split;
  split.train.reserve(n_train);
  split.validation.reserve(n_val);
  split.test.reserve(n_test);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Document& doc = docs[order[k]];
    if (k < n_train) {
      split.train.push_back(doc);
    } else if (k < n_train + n_val) {
      split.validation.push_back(doc);
    } else {
      split.test.push_back(doc);
    }
  }
  return split;
}

}  // namespace mlnet
