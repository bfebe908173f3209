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

#ifndef MLNET_CONFIG_H_
#define MLNET_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mlnet/corpus.h"
#include "mlnet/inference.h"
#include "mlnet/metrics.h"
#include "mlnet/model.h"
#include "mlnet/trainer.h"

namespace mlnet {

enum class TaskPreset { kTask1, kTask2, kTask3, kCustom };

std::string_view to_string(TaskPreset task);
TaskPreset parse_task(std::string_view name);

// Flat key -> value settings, as read from a config file or collected from
// command-line flags.
using Settings = std::map<std::string, std::string>;

// Defaults for a preset. The task1/task2/task3 values follow the published
// ML-Net settings (maximum permitted labels 5/8/70, count MLP 128-128-64 or
// 7024-7024-128, embedding width 200 or 300, sentence/token caps from the
// corpus maxima); custom starts from the task1 values with the embedding
// width inferred from the vector file.
Settings preset_settings(TaskPreset task);

// `key = value` lines; `#` starts a comment; blank lines ignored.
Settings parse_config_text(std::string_view text, const std::string& source);
Settings load_config_file(const std::filesystem::path& path);

struct RunConfig {
  TaskPreset task = TaskPreset::kTask1;
  std::uint64_t seed = 17;

  std::string corpus;
  std::string embeddings;
  std::string hierarchy;
  std::string stopwords;
  std::string model;
  std::string output;

  ModelConfig model_config;
  // 0 = take the width from the embedding file.
  int expected_embedding_dim = 0;
  TrainConfig train;
  SplitRatios ratios;
  DecodeMode decode_mode = DecodeMode::kTopK;
  Matching matching = Matching::kExact;
  std::string threshold_split = "validation";
  bool augment_labels = false;
};

// Precedence: flags > config file > preset defaults. The preset itself is
// chosen by the `task` key with the same precedence. Unknown keys throw
// UsageError.
RunConfig resolve_config(const Settings& file_settings, const Settings& flag_settings);

// All recognized keys.
const std::vector<std::string>& known_config_keys();

}  // namespace mlnet

#endif  // MLNET_CONFIG_H_
