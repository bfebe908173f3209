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

#ifndef MLNET_TOOLS_COMMANDS_H_
#define MLNET_TOOLS_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mlnet/config.h"
#include "mlnet/inference.h"
#include "mlnet/metrics.h"
#include "mlnet/trainer.h"

namespace mlnet::cli {

// Writes train.jsonl, validation.jsonl, test.jsonl and manifest.json into
// `out_dir`. Labels are ancestor-closed first when the config asks for
// augmentation.
void cmd_prepare(const RunConfig& config, const std::filesystem::path& out_dir);

struct TrainPaths {
  std::filesystem::path train;
  std::filesystem::path validation;  // optional
  std::filesystem::path log;         // defaults to <model>.log
  bool skip_stage2 = false;
};

// Stage 1 then (unless skipped) stage 2; writes the artifact to
// config.model and the epoch log. Returns the log entries.
std::vector<EpochLog> cmd_train(const RunConfig& config, const TrainPaths& paths,
                                std::ostream* diagnostics = nullptr);

struct PredictPaths {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<double> threshold;
  std::filesystem::path threshold_file;
};

// Writes one prediction JSON object per input document.
void cmd_predict(const RunConfig& config, const PredictPaths& paths);

// Joins predictions and gold documents by id. Throws DataError listing ids
// present on only one side.
MetricsReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& predictions,
                           const std::filesystem::path& gold, bool per_example = false);

// Scores `split` with the model and searches the global threshold; writes
// the threshold JSON to config.output when set.
GlobalThreshold cmd_threshold_search(const RunConfig& config,
                                     const std::filesystem::path& split);

struct GradCheckOptions {
  int instances = 3;
  double tolerance = 1e-3;
  // Harness self-test: perturbs the analytic gradient so the check must
  // fail.
  bool corrupt_backward = false;
};

// Runs the gradient check on built-in tiny fixtures; prints one line per
// parameter group. Returns true when every instance passes.
bool cmd_grad_check(const RunConfig& config, const GradCheckOptions& options, std::ostream& out);

// Full command-line entry point. Returns the process exit code: 0 success,
// 1 usage error, 2 data error, 3 numeric failure (or failed gradient check).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlnet::cli

#endif  // MLNET_TOOLS_COMMANDS_H_
