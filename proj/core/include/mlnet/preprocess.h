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

#ifndef MLNET_PREPROCESS_H_
#define MLNET_PREPROCESS_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mlnet/corpus.h"

namespace mlnet {

using StopList = std::set<std::string, std::less<>>;

struct TokenizedDocument {
  std::string doc_id;
  // Lowercased tokens; no sentence is empty.
  std::vector<std::vector<std::string>> sentences;
};

// Rule-based splitter: breaks after '.', '!' or '?' when followed by
// whitespace, and at every newline. Segments are trimmed; empty ones dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Whitespace split, then leading and trailing ASCII punctuation characters
// become standalone tokens. Everything is lowercased (ASCII only). Internal
// punctuation such as the hyphen in "p53-mediated" stays put.
std::vector<std::string> tokenize(std::string_view sentence);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopList& stoplist);

// The built-in English stop-word list (see docs/stopwords.md).
const StopList& default_stopwords();

// One token per line; blank lines skipped; tokens lowercased.
StopList load_stopwords(const std::filesystem::path& path);

// split -> tokenize -> stop-word filter -> drop empty sentences. The result
// may hold zero sentences; embed_document rejects such documents.
TokenizedDocument tokenize_document(const Document& doc, const StopList& stoplist);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, Eigen::MatrixXd vectors);

  int dim() const { return static_cast<int>(vectors_.rows()); }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  // Vector for `token`, or the all-zero unk vector.
  Eigen::VectorXd lookup(std::string_view token) const;
  const Eigen::VectorXd& unk() const { return unk_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  // Checksum of tokens and vector bits, used to pair models with the table
  // they were trained against.
  std::string digest() const;

 private:
  std::vector<std::string> tokens_;
  Eigen::MatrixXd vectors_;  // dim x size, one column per token
  std::unordered_map<std::string, Eigen::Index> index_;
  Eigen::VectorXd unk_;
};

// Plain-text word-vector format with an optional "<count> <dim>" header.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view text, const std::string& source);

// Fixed-shape encoder input. Conceptually a [s_max, t_max, d] tensor; stored
// as s_max matrices of shape d x t_max with one column per token position.
struct EncoderInput {
  std::vector<Eigen::MatrixXd> sentences;
  std::vector<std::uint8_t> sentence_mask;             // [s_max]
  std::vector<std::vector<std::uint8_t>> token_mask;   // [s_max][t_max]

  int s_max() const { return static_cast<int>(sentences.size()); }
  int t_max() const { return sentences.empty() ? 0 : static_cast<int>(sentences[0].cols()); }
  int dim() const { return sentences.empty() ? 0 : static_cast<int>(sentences[0].rows()); }
  int sentence_count() const;
};

// Truncates to s_max sentences and t_max tokens. OOV tokens map to the unk
// vector but stay unmasked. Throws DegenerateInputError for a document with
// no sentences.
EncoderInput embed_document(const TokenizedDocument& doc, const EmbeddingTable& table,
                            int s_max, int t_max);

struct PreprocessConfig {
  int s_max = 27;
  int t_max = 83;
  StopList stopwords = default_stopwords();
};

EncoderInput prepare_input(const Document& doc, const EmbeddingTable& table,
                           const PreprocessConfig& config);

}  // namespace mlnet

#endif  // MLNET_PREPROCESS_H_
