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

#ifndef MLNET_CORPUS_H_
#define MLNET_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mlnet {

using LabelSet = std::set<std::string>;

struct Document {
  std::string id;
  std::string text;
  LabelSet gold_labels;
};

enum class CorpusFormat { kJsonl };

CorpusFormat parse_corpus_format(std::string_view name);

// Reads one Document per record in file order. Labels are deduplicated.
// Throws ParseError (with line number) on malformed records and DataError on
// duplicate ids.
std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  CorpusFormat format = CorpusFormat::kJsonl);

// Parses JSONL text; `source` only labels error messages.
std::vector<Document> parse_corpus_jsonl(std::string_view text,
                                         const std::string& source);

// Serializes documents in the same JSONL format load_corpus reads.
std::string to_jsonl(const std::vector<Document>& docs);

// Bijection between label strings and indices 0..L-1, lexicographically
// ordered.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  // Sorts and deduplicates.
  explicit LabelVocabulary(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  std::optional<std::size_t> index_of(std::string_view label) const;

  // Indices of the known members of `labels`, ascending. Unknown labels are
  // skipped and counted in `unknown` when supplied.
  std::vector<std::size_t> encode(const LabelSet& labels,
                                  std::size_t* unknown = nullptr) const;
  LabelSet decode(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const LabelVocabulary& a, const LabelVocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

LabelVocabulary build_vocabulary(const std::vector<Document>& docs);

// Parent relation over label strings. Always a forest: every label has at
// most one parent and upward walks terminate at a root.
class LabelHierarchy {
 public:
  LabelHierarchy() = default;

  // Validates the forest shape. Throws DataError naming an offending label on
  // a cycle.
  static LabelHierarchy from_parent_map(std::map<std::string, std::string> parent_of);

  const std::map<std::string, std::string, std::less<>>& parent_map() const { return parent_of_; }
  bool empty() const { return parent_of_.empty(); }
  bool contains(std::string_view label) const;
  std::optional<std::string> parent(std::string_view label) const;
  // Strict ancestors from the parent upward to the root.
  std::vector<std::string> ancestors(std::string_view label) const;
  // True if `ancestor` is a strict ancestor of `label`.
  bool is_ancestor(std::string_view ancestor, std::string_view label) const;
  // x == y, or one is an ancestor of the other.
  bool related(std::string_view x, std::string_view y) const;

  // Checksum of the edge list; stable across runs.
  std::string digest() const;

 private:
  std::map<std::string, std::string, std::less<>> parent_of_;
  std::set<std::string, std::less<>> nodes_;
};

// Reads a `child<TAB>parent` edge list. `#` lines and blank lines are
// ignored; duplicate identical edges are accepted.
LabelHierarchy load_hierarchy(const std::filesystem::path& path);
LabelHierarchy parse_hierarchy_tsv(std::string_view text, const std::string& source);

// Ancestor closure of `labels`. Labels unknown to the hierarchy pass through.
LabelSet augment_labels(const LabelSet& labels, const LabelHierarchy& hierarchy);

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  std::vector<Document> train;
  std::vector<Document> validation;
  std::vector<Document> test;
};

// Seeded shuffle, then train = floor(r_train*N), validation =
// floor(r_validation*N), test = remainder.
DatasetSplit split_corpus(const std::vector<Document>& docs,
                          const SplitRatios& ratios, std::uint64_t seed);

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

}  // namespace mlnet

#endif  // MLNET_CORPUS_H_
