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

#ifndef MLNET_TRAINER_H_
#define MLNET_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mlnet/corpus.h"
#include "mlnet/heads.h"
#include "mlnet/model.h"
#include "mlnet/preprocess.h"
#include "mlnet/tensor.h"

namespace mlnet {

struct TrainConfig {
  double learning_rate = 0.001;
  int stage1_epochs = 50;
  int batch_size = 32;
  int early_stop_patience = 5;
  int stage2_max_epochs = 100;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Global-norm gradient clip; <= 0 disables clipping.
  double clip_norm = 5.0;
  LsepSampling sampling;
  bool lsep_on_preactivation = false;
  std::size_t threads = 1;
  // Progress and clamp/clip notices; silent when null.
  std::ostream* diagnostics = nullptr;

  // Throws UsageError on out-of-range settings.
  void validate() const;
};

struct OptimizerState {
  std::vector<Eigen::VectorXd> first_moment;
  std::vector<Eigen::VectorXd> second_moment;
  std::int64_t step = 0;
};

// One bias-corrected Adam step over paired parameter and gradient tensors.
// Throws NumericError naming the tensor if a gradient is not finite; no
// parameter is modified in that case.
void adam_update(std::span<const TensorRef> params, std::span<const ConstTensorRef> grads,
                 OptimizerState& state, const TrainConfig& config);

// A document ready for the encoder, with its gold label indices.
struct LabeledInput {
  std::string id;
  EncoderInput input;
  std::vector<std::size_t> gold;  // ascending vocabulary indices
  std::size_t raw_count = 0;      // |gold| before vocabulary filtering
};

// Preprocesses and embeds documents. Degenerate documents are skipped and
// reported on `diagnostics`; labels outside the vocabulary are dropped.
std::vector<LabeledInput> prepare_examples(const std::vector<Document>& docs,
                                           const EmbeddingTable& embeddings,
                                           const ModelBundle& bundle,
                                           std::ostream* diagnostics = nullptr);

struct EpochLog {
  int stage = 1;
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;  // absent when there is no validation data
};

// `stage epoch train_loss val_loss`, tab separated, "NA" for a missing
// validation loss.
std::string format_log_line(const EpochLog& entry);

// Gradients of the stage-1 objective (encoder and label head only).
struct Stage1Grads {
  EncoderParams encoder;
  LabelScoreHead label_head;

  static Stage1Grads zeros_like(const ModelBundle& bundle);
  Stage1Grads& operator+=(const Stage1Grads& other);
  void scale(double factor);
};

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, Stage1Grads>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  for_each_tensor(p.encoder, join_name(prefix, "encoder"), f);
  for_each_tensor(p.label_head, join_name(prefix, "label_head"), f);
}

// LSEP loss of one document. Accumulates gradients into `grads` when given.
// Train mode needs `rng` (dropout and negative sampling).
double stage1_example_loss(const LabeledInput& example, const ModelBundle& bundle, Mode mode,
                           Rng* rng, const TrainConfig& config, Stage1Grads* grads);

// Mean stage-1 loss over `examples` in train mode, with dropout masks drawn
// from a generator reseeded per example from `dropout_seed`. Exact LSEP.
double stage1_objective(const ModelBundle& bundle, std::span<const LabeledInput> examples,
                        std::uint64_t dropout_seed, const TrainConfig& config);
// Analytic gradient of stage1_objective.
Stage1Grads stage1_gradient(const ModelBundle& bundle, std::span<const LabeledInput> examples,
                            std::uint64_t dropout_seed, const TrainConfig& config);

// Stage 1: encoder + label head under mini-batch LSEP for a fixed number of
// epochs. The count head is left untouched.
std::vector<EpochLog> train_stage1(std::span<const LabeledInput> train,
                                   std::span<const LabeledInput> validation,
                                   ModelBundle& bundle, const TrainConfig& config);
std::vector<EpochLog> train_stage1(const DatasetSplit& splits, const EmbeddingTable& embeddings,
                                   ModelBundle& bundle, const TrainConfig& config);

// Stage 2: count head only, on document vectors from the frozen encoder in
// eval mode. Early stopping on validation cross-entropy (training
// cross-entropy when there is no validation data), restoring the best
// parameters.
std::vector<EpochLog> train_stage2(std::span<const LabeledInput> train,
                                   std::span<const LabeledInput> validation,
                                   ModelBundle& bundle, const TrainConfig& config);
std::vector<EpochLog> train_stage2(const DatasetSplit& splits, const EmbeddingTable& embeddings,
                                   ModelBundle& bundle, const TrainConfig& config);

struct GradientGroupReport {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradientCheckReport {
  std::vector<GradientGroupReport> groups;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Supplies the analytic gradient checked by gradient_check; the default is
// stage1_gradient. Tests substitute corrupted versions to confirm the check
// fails.
using Stage1Backward = std::function<Stage1Grads(
    const ModelBundle&, std::span<const LabeledInput>, std::uint64_t, const TrainConfig&)>;

// Compares the analytic stage-1 gradient against central differences with
// step `step`, element by element. The relative error of an element is
// |a - n| / max(|a|, |n|, abs_floor).
GradientCheckReport gradient_check(const ModelBundle& bundle,
                                   std::span<const LabeledInput> examples, double tolerance,
                                   const Stage1Backward& backward = {}, double step = 1e-4,
                                   double abs_floor = 1e-6);

}  // namespace mlnet

#endif  // MLNET_TRAINER_H_
