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

#include "mlnet/artifact.h"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "mlnet/errors.h"
#include "io_util.h"

namespace mlnet {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'L', 'N', 'E', 'T', 'A', 'R', 'T'};

template <class T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  U bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void put_double(std::string& out, double value) { put_le(out, std::bit_cast<std::uint64_t>(value)); }

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <class T>
  T get_le() {
    need(sizeof(T));
    std::make_unsigned_t<T> bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i]))
              << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(bits);
  }
  double get_double() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError(source_ + ": truncated model artifact");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
  const std::string& source_;
};

std::string tensor_checksum(const ConstTensorRef& t) {
  Fnv1a64 h;
  h.update(t.name);
  h.update(std::to_string(t.rows) + "x" + std::to_string(t.cols));
  h.update_doubles(std::span<const double>(t.data, static_cast<std::size_t>(t.size())));
  return h.hex();
}

json config_to_json(const ModelConfig& c) {
  json j;
  j["embedding_dim"] = c.encoder.embedding_dim;
  j["word_hidden"] = c.encoder.word_hidden;
  j["word_attention"] = c.encoder.word_attention;
  j["sentence_hidden"] = c.encoder.sentence_hidden;
  j["sentence_attention"] = c.encoder.sentence_attention;
  j["dropout_rate"] = c.encoder.dropout_rate;
  j["count_hidden"] = c.count_hidden;
  j["max_labels"] = c.max_labels;
  j["s_max"] = c.preprocess.s_max;
  j["t_max"] = c.preprocess.t_max;
  j["stopwords"] = std::vector<std::string>(c.preprocess.stopwords.begin(),
                                            c.preprocess.stopwords.end());
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.encoder.embedding_dim = j.at("embedding_dim").get<int>();
  c.encoder.word_hidden = j.at("word_hidden").get<int>();
  c.encoder.word_attention = j.at("word_attention").get<int>();
  c.encoder.sentence_hidden = j.at("sentence_hidden").get<int>();
  c.encoder.sentence_attention = j.at("sentence_attention").get<int>();
  c.encoder.dropout_rate = j.at("dropout_rate").get<double>();
  c.count_hidden = j.at("count_hidden").get<std::vector<int>>();
  c.max_labels = j.at("max_labels").get<int>();
  c.preprocess.s_max = j.at("s_max").get<int>();
  c.preprocess.t_max = j.at("t_max").get<int>();
  auto words = j.at("stopwords").get<std::vector<std::string>>();
  c.preprocess.stopwords = StopList(words.begin(), words.end());
  return c;
}

}  // namespace

std::string serialize_model(const ModelBundle& bundle) {
  bundle.validate();
  const auto tensors = collect_tensors(bundle);

  std::string payload;
  put_le<std::uint64_t>(payload, tensors.size());
  json tensor_meta = json::array();
  for (const auto& t : tensors) {
    put_le<std::uint32_t>(payload, static_cast<std::uint32_t>(t.name.size()));
    payload += t.name;
    put_le<std::uint64_t>(payload, static_cast<std::uint64_t>(t.rows));
    put_le<std::uint64_t>(payload, static_cast<std::uint64_t>(t.cols));
    auto m = t.map();
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) put_double(payload, m(r, c));
    }
    tensor_meta.push_back({{"name", t.name},
                           {"rows", t.rows},
                           {"cols", t.cols},
                           {"checksum", tensor_checksum(t)}});
  }
  Fnv1a64 payload_hash;
  payload_hash.update(payload);

  json header;
  header["format_version"] = kArtifactVersion;
  header["config"] = config_to_json(bundle.config);
  header["vocabulary"] = bundle.vocab.labels();
  header["seed"] = bundle.seed;
  header["embedding_digest"] = bundle.embedding_digest;
  header["hierarchy_digest"] = bundle.hierarchy_digest;
  header["stage1_trained"] = bundle.stage1_trained;
  header["count_head_trained"] = bundle.count_head_trained;
  header["tensors"] = std::move(tensor_meta);
  header["payload_checksum"] = payload_hash.hex();
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kArtifactVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out += header_text;
  out += payload;
  return out;
}

ModelBundle deserialize_model(std::string_view bytes, const std::string& source) {
  Reader in(bytes, source);
  if (in.get_bytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw DataError(source + ": not an mlnet model artifact");
  }
  const auto version = in.get_le<std::uint32_t>();
  if (version != kArtifactVersion) {
    throw DataError(source + ": unsupported artifact version " + std::to_string(version));
  }
  const auto header_len = in.get_le<std::uint64_t>();
  json header;
  try {
    header = json::parse(in.get_bytes(header_len));
  } catch (const json::exception& e) {
    throw DataError(source + ": malformed artifact header: " + e.what());
  }
  const std::size_t payload_start = sizeof(kMagic) + 4 + 8 + header_len;
  Fnv1a64 payload_hash;
  payload_hash.update(bytes.substr(payload_start));

  ModelBundle bundle;
  try {
    if (payload_hash.hex() != header.at("payload_checksum").get<std::string>()) {
      throw DataError(source + ": payload checksum mismatch");
    }
    bundle.config = config_from_json(header.at("config"));
    bundle.vocab = LabelVocabulary(header.at("vocabulary").get<std::vector<std::string>>());
    bundle.seed = header.at("seed").get<std::uint64_t>();
    bundle.embedding_digest = header.at("embedding_digest").get<std::string>();
    bundle.hierarchy_digest = header.at("hierarchy_digest").get<std::string>();
    bundle.stage1_trained = header.at("stage1_trained").get<bool>();
    bundle.count_head_trained = header.at("count_head_trained").get<bool>();
  } catch (const json::exception& e) {
    throw DataError(source + ": incomplete artifact header: " + e.what());
  }
  bundle.encoder = EncoderParams::zeros(bundle.config.encoder);
  bundle.label_head = LabelScoreHead::zeros(bundle.num_labels(), bundle.encoder.output_dim());
  bundle.count_head = CountHead::zeros(bundle.encoder.output_dim(), bundle.config.count_hidden,
                                       bundle.config.max_labels);

  auto tensors = collect_tensors(bundle);
  const json& meta = header.at("tensors");
  const auto count = in.get_le<std::uint64_t>();
  if (count != tensors.size() || meta.size() != tensors.size()) {
    throw DataError(source + ": artifact holds " + std::to_string(count) +
                    " tensors, model expects " + std::to_string(tensors.size()));
  }
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    auto& t = tensors[k];
    const auto name_len = in.get_le<std::uint32_t>();
    const std::string name(in.get_bytes(name_len));
    const auto rows = in.get_le<std::uint64_t>();
    const auto cols = in.get_le<std::uint64_t>();
    if (name != t.name || rows != static_cast<std::uint64_t>(t.rows) ||
        cols != static_cast<std::uint64_t>(t.cols)) {
      throw DataError(source + ": tensor " + std::to_string(k) + " is '" + name + "' " +
                      std::to_string(rows) + "x" + std::to_string(cols) + ", expected '" +
                      t.name + "' " + std::to_string(t.rows) + "x" + std::to_string(t.cols));
    }
    auto m = t.map();
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) m(r, c) = in.get_double();
    }
    const ConstTensorRef view{t.name, t.data, t.rows, t.cols};
    if (meta[k].value("checksum", std::string()) != tensor_checksum(view)) {
      throw DataError(source + ": checksum mismatch for tensor '" + t.name + "'");
    }
  }
  if (!in.at_end()) throw DataError(source + ": trailing bytes after tensor payload");
  bundle.validate();
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  internal::write_text_file(path, serialize_model(bundle));
}

ModelBundle load_model(const std::filesystem::path& path) {
  return deserialize_model(internal::read_text_file(path), path.string());
}

}  // namespace mlnet
