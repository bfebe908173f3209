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

#include "mlnet/preprocess.h"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "mlnet/checksum.h"
#include "mlnet/errors.h"
#include "io_util.h"

namespace mlnet {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

void push_trimmed(std::vector<std::string>& out, std::string_view segment) {
  segment = internal::trim(segment);
  if (!segment.empty()) out.emplace_back(segment);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (std::string_view line : internal::split_lines(text)) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if ((c == '.' || c == '!' || c == '?') && i + 1 < line.size() && is_space(line[i + 1])) {
        push_trimmed(out, line.substr(start, i + 1 - start));
        start = i + 1;
      }
    }
    push_trimmed(out, line.substr(start));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> out;
  for (std::string_view word : split_ws(sentence)) {
    std::size_t b = 0;
    std::size_t e = word.size();
    while (b < e && is_punct(word[b])) ++b;
    // An all-punctuation word: every character is its own token.
    if (b == e) {
      for (char c : word) out.emplace_back(1, c);
      continue;
    }
    while (e > b && is_punct(word[e - 1])) --e;
    for (std::size_t i = 0; i < b; ++i) out.emplace_back(1, word[i]);
    out.push_back(lower(word.substr(b, e - b)));
    for (std::size_t i = e; i < word.size(); ++i) out.emplace_back(1, word[i]);
  }
  return out;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopList& stoplist) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (stoplist.find(t) == stoplist.end()) out.push_back(t);
  }
  return out;
}

StopList load_stopwords(const std::filesystem::path& path) {
  StopList out;
  for (std::string_view line : internal::split_lines(internal::read_text_file(path))) {
    line = internal::trim(line);
    if (!line.empty()) out.insert(lower(line));
  }
  return out;
}

TokenizedDocument tokenize_document(const Document& doc, const StopList& stoplist) {
  TokenizedDocument out;
  out.doc_id = doc.id;
  for (const auto& sentence : split_sentences(doc.text)) {
    auto tokens = remove_stopwords(tokenize(sentence), stoplist);
    if (!tokens.empty()) out.sentences.push_back(std::move(tokens));
  }
  return out;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, Eigen::MatrixXd vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(tokens_.size()) != vectors_.cols()) {
    throw DimensionError("embedding table: token count does not match vector count");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    // First occurrence wins on duplicate rows.
    index_.emplace(tokens_[i], static_cast<Eigen::Index>(i));
  }
  unk_ = Eigen::VectorXd::Zero(vectors_.rows());
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

Eigen::VectorXd EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return unk_;
  return vectors_.col(it->second);
}

std::string EmbeddingTable::digest() const {
  Fnv1a64 h;
  h.update(std::to_string(vectors_.rows()));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    h.update(tokens_[i]);
    h.update(std::string_view("\0", 1));
    h.update_doubles(std::span<const double>(vectors_.col(static_cast<Eigen::Index>(i)).data(),
                                             static_cast<std::size_t>(vectors_.rows())));
  }
  return h.hex();
}

EmbeddingTable parse_embeddings(std::string_view text, const std::string& source) {
  auto lines = internal::split_lines(text);
  std::vector<std::string> tokens;
  std::vector<double> values;
  long dim = -1;
  long header_dim = -1;
  bool first = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    auto fields = split_ws(lines[i]);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2) {
        long a = 0;
        long b = 0;
        auto ra = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), a);
        auto rb = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), b);
        if (ra.ec == std::errc() && ra.ptr == fields[0].data() + fields[0].size() &&
            rb.ec == std::errc() && rb.ptr == fields[1].data() + fields[1].size()) {
          header_dim = b;
          continue;
        }
      }
    }
    const long row_dim = static_cast<long>(fields.size()) - 1;
    if (row_dim < 1) throw ParseError(source, lineno, "row has no vector components");
    if (dim < 0) {
      dim = row_dim;
      if (header_dim >= 0 && header_dim != dim) {
        throw ParseError(source, lineno,
                         "header declares dimension " + std::to_string(header_dim) +
                             " but row has " + std::to_string(dim));
      }
    } else if (row_dim != dim) {
      throw ParseError(source, lineno,
                       "inconsistent vector length " + std::to_string(row_dim) +
                           " (expected " + std::to_string(dim) + ")");
    }
    tokens.emplace_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0;
      auto f = fields[k];
      auto r = std::from_chars(f.data(), f.data() + f.size(), v);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size()) {
        throw ParseError(source, lineno, "non-numeric component '" + std::string(f) + "'");
      }
      values.push_back(v);
    }
  }
  if (dim < 0) throw ParseError(source, 0, "no embedding rows");
  Eigen::MatrixXd vectors =
      Eigen::Map<Eigen::MatrixXd>(values.data(), dim, static_cast<Eigen::Index>(tokens.size()));
  return EmbeddingTable(std::move(tokens), std::move(vectors));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(internal::read_text_file(path), path.string());
}

int EncoderInput::sentence_count() const {
  return static_cast<int>(std::count(sentence_mask.begin(), sentence_mask.end(), 1));
}

EncoderInput embed_document(const TokenizedDocument& doc, const EmbeddingTable& table,
                            int s_max, int t_max) {
  if (s_max < 1 || t_max < 1) throw UsageError("s_max and t_max must be at least 1");
  if (doc.sentences.empty()) {
    throw DegenerateInputError("document '" + doc.doc_id + "' has no sentences after preprocessing");
  }
  const int d = table.dim();
  EncoderInput in;
  in.sentences.assign(s_max, Eigen::MatrixXd::Zero(d, t_max));
  in.sentence_mask.assign(s_max, 0);
  in.token_mask.assign(s_max, std::vector<std::uint8_t>(t_max, 0));
  const int n_sent = std::min<int>(s_max, static_cast<int>(doc.sentences.size()));
  for (int s = 0; s < n_sent; ++s) {
    const auto& tokens = doc.sentences[s];
    const int n_tok = std::min<int>(t_max, static_cast<int>(tokens.size()));
    in.sentence_mask[s] = n_tok > 0 ? 1 : 0;
    for (int t = 0; t < n_tok; ++t) {
      in.sentences[s].col(t) = table.lookup(tokens[t]);
      in.token_mask[s][t] = 1;
    }
  }
  return in;
}

EncoderInput prepare_input(const Document& doc, const EmbeddingTable& table,
                           const PreprocessConfig& config) {
  return embed_document(tokenize_document(doc, config.stopwords), table, config.s_max,
                        config.t_max);
}

}  // namespace mlnet
