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

#include "mlnet/config.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "mlnet/errors.h"
#include "io_util.h"

namespace mlnet {

namespace {

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw UsageError("setting '" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw UsageError("setting '" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0;
  auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw UsageError("setting '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("setting '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.emplace_back(internal::trim(item));
  return out;
}

}  // namespace

std::string_view to_string(TaskPreset task) {
  switch (task) {
    case TaskPreset::kTask1: return "task1";
    case TaskPreset::kTask2: return "task2";
    case TaskPreset::kTask3: return "task3";
    case TaskPreset::kCustom: return "custom";
  }
  return "custom";
}

TaskPreset parse_task(std::string_view name) {
  if (name == "task1") return TaskPreset::kTask1;
  if (name == "task2") return TaskPreset::kTask2;
  if (name == "task3") return TaskPreset::kTask3;
  if (name == "custom") return TaskPreset::kCustom;
  throw UsageError("unknown task preset '" + std::string(name) + "'");
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> kKeys = {
      "task", "seed", "corpus", "embeddings", "hierarchy", "stopwords", "model", "output",
      "learning_rate", "stage1_epochs", "batch_size", "early_stop_patience",
      "stage2_max_epochs", "adam_beta1", "adam_beta2", "adam_epsilon", "clip_norm",
      "neg_sample_size", "lsep_exact_cutoff", "lsep_on_preactivation", "max_labels",
      "count_hidden", "embedding_dim", "word_hidden", "word_attention", "sentence_hidden",
      "sentence_attention", "dropout_rate", "s_max", "t_max", "split_ratios", "decode_mode",
      "matching", "threshold_split", "augment_labels", "threads"};
  return kKeys;
}

Settings preset_settings(TaskPreset task) {
  Settings s = {
      {"seed", "17"},
      {"learning_rate", "0.001"},
      {"stage1_epochs", "50"},
      {"batch_size", "32"},
      {"early_stop_patience", "5"},
      {"stage2_max_epochs", "100"},
      {"adam_beta1", "0.9"},
      {"adam_beta2", "0.999"},
      {"adam_epsilon", "1e-8"},
      {"clip_norm", "5.0"},
      {"neg_sample_size", "1024"},
      {"lsep_exact_cutoff", "256"},
      {"lsep_on_preactivation", "false"},
      {"word_hidden", "50"},
      {"word_attention", "50"},
      {"sentence_hidden", "50"},
      {"sentence_attention", "50"},
      {"dropout_rate", "0.5"},
      {"split_ratios", "0.7,0.1,0.2"},
      {"decode_mode", "topk"},
      {"matching", "exact"},
      {"threshold_split", "validation"},
      {"augment_labels", "false"},
      {"threads", "1"},
      {"max_labels", "5"},
      {"count_hidden", "128,128,64"},
      {"embedding_dim", "200"},
      {"s_max", "27"},
      {"t_max", "83"},
  };
  switch (task) {
    case TaskPreset::kTask1:
      break;
    case TaskPreset::kTask2:
      s["max_labels"] = "8";
      s["s_max"] = "34";
      s["t_max"] = "120";
      break;
    case TaskPreset::kTask3:
      s["max_labels"] = "70";
      s["count_hidden"] = "7024,7024,128";
      s["embedding_dim"] = "300";
      s["s_max"] = "904";
      s["t_max"] = "20";
      s["matching"] = "hierarchical";
      s["threshold_split"] = "train";
      s["augment_labels"] = "true";
      break;
    case TaskPreset::kCustom:
      s["embedding_dim"] = "auto";
      break;
  }
  s["task"] = std::string(to_string(task));
  return s;
}

Settings parse_config_text(std::string_view text, const std::string& source) {
  Settings out;
  auto lines = internal::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = internal::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, i + 1, "expected 'key = value'");
    std::string key(internal::trim(line.substr(0, eq)));
    std::string value(internal::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(source, i + 1, "empty key");
    const auto& keys = known_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ParseError(source, i + 1, "unknown setting '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

Settings load_config_file(const std::filesystem::path& path) {
  return parse_config_text(internal::read_text_file(path), path.string());
}

RunConfig resolve_config(const Settings& file_settings, const Settings& flag_settings) {
  std::string task_name = "task1";
  if (auto it = file_settings.find("task"); it != file_settings.end()) task_name = it->second;
  if (auto it = flag_settings.find("task"); it != flag_settings.end()) task_name = it->second;
  const TaskPreset task = parse_task(task_name);

  Settings s = preset_settings(task);
  const auto& keys = known_config_keys();
  for (const Settings* layer : {&file_settings, &flag_settings}) {
    for (const auto& [key, value] : *layer) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw UsageError("unknown setting '" + key + "'");
      }
      s[key] = value;
    }
  }
  auto get = [&](const char* key) -> const std::string& {
    static const std::string kEmpty;
    auto it = s.find(key);
    return it == s.end() ? kEmpty : it->second;
  };

  RunConfig c;
  c.task = task;
  c.seed = to_u64("seed", get("seed"));
  c.corpus = get("corpus");
  c.embeddings = get("embeddings");
  c.hierarchy = get("hierarchy");
  c.stopwords = get("stopwords");
  c.model = get("model");
  c.output = get("output");

  TrainConfig& t = c.train;
  t.learning_rate = to_double("learning_rate", get("learning_rate"));
  t.stage1_epochs = to_int("stage1_epochs", get("stage1_epochs"));
  t.batch_size = to_int("batch_size", get("batch_size"));
  t.early_stop_patience = to_int("early_stop_patience", get("early_stop_patience"));
  t.stage2_max_epochs = to_int("stage2_max_epochs", get("stage2_max_epochs"));
  t.adam_beta1 = to_double("adam_beta1", get("adam_beta1"));
  t.adam_beta2 = to_double("adam_beta2", get("adam_beta2"));
  t.adam_epsilon = to_double("adam_epsilon", get("adam_epsilon"));
  t.clip_norm = to_double("clip_norm", get("clip_norm"));
  t.sampling.neg_sample_size = to_u64("neg_sample_size", get("neg_sample_size"));
  t.sampling.exact_cutoff = to_u64("lsep_exact_cutoff", get("lsep_exact_cutoff"));
  t.lsep_on_preactivation = to_bool("lsep_on_preactivation", get("lsep_on_preactivation"));
  t.threads = std::max<std::size_t>(1, to_u64("threads", get("threads")));
  t.seed = c.seed;
  t.validate();

  ModelConfig& m = c.model_config;
  m.max_labels = to_int("max_labels", get("max_labels"));
  if (m.max_labels < 1) throw UsageError("max_labels must be at least 1");
  m.count_hidden.clear();
  for (const auto& w : split_commas(get("count_hidden"))) {
    if (w.empty()) continue;
    m.count_hidden.push_back(to_int("count_hidden", w));
  }
  const std::string& dim = get("embedding_dim");
  c.expected_embedding_dim = dim == "auto" ? 0 : to_int("embedding_dim", dim);
  m.encoder.embedding_dim = c.expected_embedding_dim;
  m.encoder.word_hidden = to_int("word_hidden", get("word_hidden"));
  m.encoder.word_attention = to_int("word_attention", get("word_attention"));
  m.encoder.sentence_hidden = to_int("sentence_hidden", get("sentence_hidden"));
  m.encoder.sentence_attention = to_int("sentence_attention", get("sentence_attention"));
  m.encoder.dropout_rate = to_double("dropout_rate", get("dropout_rate"));
  m.preprocess.s_max = to_int("s_max", get("s_max"));
  m.preprocess.t_max = to_int("t_max", get("t_max"));
  if (m.preprocess.s_max < 1 || m.preprocess.t_max < 1) {
    throw UsageError("s_max and t_max must be at least 1");
  }

  auto ratios = split_commas(get("split_ratios"));
  if (ratios.size() != 3) throw UsageError("split_ratios expects three comma-separated values");
  c.ratios = {to_double("split_ratios", ratios[0]), to_double("split_ratios", ratios[1]),
              to_double("split_ratios", ratios[2])};
  c.decode_mode = parse_decode_mode(get("decode_mode"));
  c.matching = parse_matching(get("matching"));
  c.threshold_split = get("threshold_split");
  if (c.threshold_split != "train" && c.threshold_split != "validation") {
    throw UsageError("threshold_split must be 'train' or 'validation'");
  }
  c.augment_labels = to_bool("augment_labels", get("augment_labels"));
  return c;
}

}  // namespace mlnet
