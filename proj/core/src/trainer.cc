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

#include "mlnet/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mlnet/errors.h"
#include "mlnet/parallel.h"

namespace mlnet {

namespace {

using Eigen::VectorXd;

// Stream ids for Rng::derive.
constexpr std::uint64_t kShuffleStream = 11;
constexpr std::uint64_t kExampleStream = 12;
constexpr std::uint64_t kCountShuffleStream = 21;

std::vector<TensorRef> stage1_params(ModelBundle& bundle) {
  auto out = collect_tensors(bundle.encoder, "encoder");
  auto head = collect_tensors(bundle.label_head, "label_head");
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

void clip_gradients(std::span<const TensorRef> grads, const TrainConfig& config,
                    const char* stage, int epoch) {
  if (config.clip_norm <= 0.0) return;
  double sq = 0.0;
  for (const auto& g : grads) sq += g.map().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > config.clip_norm) {
    const double factor = config.clip_norm / norm;
    for (const auto& g : grads) g.map() *= factor;
    if (config.diagnostics != nullptr) {
      *config.diagnostics << "[" << stage << " epoch " << epoch << "] clipped gradient norm "
                          << norm << " to " << config.clip_norm << "\n";
    }
  }
}

template <class P>
std::vector<ConstTensorRef> to_const_refs(const std::vector<BasicTensorRef<P>>& refs) {
  std::vector<ConstTensorRef> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back({r.name, r.data, r.rows, r.cols});
  return out;
}

void require_finite(double loss, const char* stage, int epoch, const std::string& what) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << stage << " epoch " << epoch << ": non-finite loss (" << what << ")";
    throw NumericError(msg.str());
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                                     int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(Rng::derive(seed, {stream, static_cast<std::uint64_t>(epoch)}));
  rng.shuffle(order);
  return order;
}

double mean_eval_loss(std::span<const LabeledInput> examples, const ModelBundle& bundle,
                      const TrainConfig& config) {
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), config.threads, [&](std::size_t i) {
    losses[i] = stage1_example_loss(examples[i], bundle, Mode::kEval, nullptr, config, nullptr);
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(examples.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (stage1_epochs < 1) throw UsageError("stage1_epochs must be at least 1");
  if (stage2_max_epochs < 1) throw UsageError("stage2_max_epochs must be at least 1");
  if (early_stop_patience < 1) throw UsageError("early_stop_patience must be at least 1");
  if (batch_size < 1) throw UsageError("batch_size must be at least 1");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
    throw UsageError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw UsageError("adam_epsilon must be positive");
  if (sampling.neg_sample_size < 1) throw UsageError("neg_sample_size must be at least 1");
}

void adam_update(std::span<const TensorRef> params, std::span<const ConstTensorRef> grads,
                 OptimizerState& state, const TrainConfig& config) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam: parameter and gradient lists differ in length");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size()) {
      throw DimensionError("adam: shape mismatch for " + params[k].name);
    }
    if (!grads[k].map().allFinite()) {
      throw NumericError("adam: non-finite gradient in " + params[k].name);
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(VectorXd::Zero(p.size()));
      state.second_moment.push_back(VectorXd::Zero(p.size()));
    }
  } else if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam: optimizer state does not match parameters");
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::Map<VectorXd> p(params[k].data, params[k].size());
    Eigen::Map<const VectorXd> g(grads[k].data, grads[k].size());
    VectorXd& m = state.first_moment[k];
    VectorXd& v = state.second_moment[k];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= config.learning_rate * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + config.adam_epsilon);
  }
}

std::vector<LabeledInput> prepare_examples(const std::vector<Document>& docs,
                                           const EmbeddingTable& embeddings,
                                           const ModelBundle& bundle,
                                           std::ostream* diagnostics) {
  std::vector<LabeledInput> out;
  out.reserve(docs.size());
  const auto& pre = bundle.config.preprocess;
  for (const Document& doc : docs) {
    TokenizedDocument tokens = tokenize_document(doc, pre.stopwords);
    if (tokens.sentences.empty()) {
      if (diagnostics != nullptr) {
        *diagnostics << "skipping degenerate document '" << doc.id << "' (no sentences)\n";
      }
      continue;
    }
    LabeledInput ex;
    ex.id = doc.id;
    ex.input = embed_document(tokens, embeddings, pre.s_max, pre.t_max);
    ex.gold = bundle.vocab.encode(doc.gold_labels);
    ex.raw_count = doc.gold_labels.size();
    out.push_back(std::move(ex));
  }
  return out;
}

std::string format_log_line(const EpochLog& entry) {
  std::ostringstream line;
  line.precision(10);
  line << entry.stage << '\t' << entry.epoch << '\t' << entry.train_loss << '\t';
  if (entry.val_loss) {
    line << *entry.val_loss;
  } else {
    line << "NA";
  }
  return line.str();
}

Stage1Grads Stage1Grads::zeros_like(const ModelBundle& bundle) {
  Stage1Grads g;
  g.encoder = bundle.encoder;
  g.label_head = bundle.label_head;
  for (auto& t : collect_tensors(g)) t.map().setZero();
  return g;
}

Stage1Grads& Stage1Grads::operator+=(const Stage1Grads& other) {
  auto mine = collect_tensors(*this);
  auto theirs = collect_tensors(other);
  for (std::size_t k = 0; k < mine.size(); ++k) mine[k].map() += theirs[k].map();
  return *this;
}

void Stage1Grads::scale(double factor) {
  for (auto& t : collect_tensors(*this)) t.map() *= factor;
}

double stage1_example_loss(const LabeledInput& example, const ModelBundle& bundle, Mode mode,
                           Rng* rng, const TrainConfig& config, Stage1Grads* grads) {
  EncoderTrace trace;
  VectorXd x = encode_document(example.input, bundle.encoder, mode, rng,
                               grads != nullptr ? &trace : nullptr);
  VectorXd pre;
  ScoreVector scores = score_labels(x, bundle.label_head, &pre);
  const VectorXd& ranked = config.lsep_on_preactivation ? pre : scores;
  LsepResult r = (mode == Mode::kTrain && rng != nullptr)
                     ? lsep_sampled_with_gradient(ranked, example.gold, config.sampling, *rng)
                     : lsep_with_gradient(ranked, example.gold);
  if (grads != nullptr) {
    VectorXd d_x = score_labels_backward(x, pre, r.gradient, bundle.label_head,
                                         grads->label_head, !config.lsep_on_preactivation);
    encode_document_backward(trace, d_x, bundle.encoder, grads->encoder);
  }
  return r.loss;
}

double stage1_objective(const ModelBundle& bundle, std::span<const LabeledInput> examples,
                        std::uint64_t dropout_seed, const TrainConfig& config) {
  TrainConfig exact = config;
  exact.sampling.exact_cutoff = std::numeric_limits<std::size_t>::max();
  double total = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    Rng rng(Rng::derive(dropout_seed, {i}));
    total += stage1_example_loss(examples[i], bundle, Mode::kTrain, &rng, exact, nullptr);
  }
  return total / static_cast<double>(examples.size());
}

Stage1Grads stage1_gradient(const ModelBundle& bundle, std::span<const LabeledInput> examples,
                            std::uint64_t dropout_seed, const TrainConfig& config) {
  TrainConfig exact = config;
  exact.sampling.exact_cutoff = std::numeric_limits<std::size_t>::max();
  Stage1Grads grads = Stage1Grads::zeros_like(bundle);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    Rng rng(Rng::derive(dropout_seed, {i}));
    stage1_example_loss(examples[i], bundle, Mode::kTrain, &rng, exact, &grads);
  }
  grads.scale(1.0 / static_cast<double>(examples.size()));
  return grads;
}

std::vector<EpochLog> train_stage1(std::span<const LabeledInput> train,
                                   std::span<const LabeledInput> validation,
                                   ModelBundle& bundle, const TrainConfig& config) {
  config.validate();
  bundle.validate();
  if (train.empty()) throw DataError("stage 1: empty training split");

  const std::string count_before = params_checksum(bundle.count_head);
  OptimizerState state;
  std::vector<TensorRef> params = stage1_params(bundle);
  std::vector<EpochLog> log;
  const std::size_t n = train.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.stage1_epochs; ++epoch) {
    std::vector<std::size_t> order = epoch_order(n, config.seed, kShuffleStream, epoch);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      std::vector<Stage1Grads> slots(count);
      std::vector<double> losses(count, 0.0);
      parallel_for(count, config.threads, [&](std::size_t i) {
        const std::size_t idx = order[start + i];
        Rng rng(Rng::derive(config.seed, {kExampleStream, static_cast<std::uint64_t>(epoch), idx}));
        slots[i] = Stage1Grads::zeros_like(bundle);
        losses[i] = stage1_example_loss(train[idx], bundle, Mode::kTrain, &rng, config, &slots[i]);
      });
      for (std::size_t i = 0; i < count; ++i) {
        require_finite(losses[i], "stage 1", epoch, "document '" + train[order[start + i]].id + "'");
        loss_sum += losses[i];
        if (i > 0) slots[0] += slots[i];
      }
      slots[0].scale(1.0 / static_cast<double>(count));
      auto grad_refs = collect_tensors(slots[0], "");
      clip_gradients(grad_refs, config, "stage 1", epoch);
      adam_update(params, to_const_refs(grad_refs), state, config);
    }
    EpochLog entry;
    entry.stage = 1;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(n);
    if (!validation.empty()) {
      entry.val_loss = mean_eval_loss(validation, bundle, config);
      require_finite(*entry.val_loss, "stage 1", epoch, "validation");
    }
    if (config.diagnostics != nullptr) *config.diagnostics << format_log_line(entry) << "\n";
    log.push_back(entry);
  }
  if (params_checksum(bundle.count_head) != count_before) {
    throw NumericError("stage 1 modified the count head");
  }
  bundle.stage1_trained = true;
  return log;
}

std::vector<EpochLog> train_stage1(const DatasetSplit& splits, const EmbeddingTable& embeddings,
                                   ModelBundle& bundle, const TrainConfig& config) {
  auto train = prepare_examples(splits.train, embeddings, bundle, config.diagnostics);
  auto validation = prepare_examples(splits.validation, embeddings, bundle, config.diagnostics);
  return train_stage1(train, validation, bundle, config);
}

namespace {

struct CountExample {
  VectorXd x;
  int gold_count = 1;
};

std::vector<CountExample> count_examples(std::span<const LabeledInput> examples,
                                         const ModelBundle& bundle, const TrainConfig& config) {
  std::vector<CountExample> out(examples.size());
  parallel_for(examples.size(), config.threads, [&](std::size_t i) {
    out[i].x = encode_document(examples[i].input, bundle.encoder, Mode::kEval);
  });
  for (std::size_t i = 0; i < examples.size(); ++i) {
    bool clamped = false;
    out[i].gold_count = clamp_count(examples[i].raw_count, bundle.config.max_labels, &clamped);
    if (clamped && config.diagnostics != nullptr) {
      *config.diagnostics << "clamped label count of '" << examples[i].id << "' from "
                          << examples[i].raw_count << " to " << out[i].gold_count << "\n";
    }
  }
  return out;
}

double mean_count_loss(const std::vector<CountExample>& examples, const CountHead& head) {
  double total = 0.0;
  for (const auto& ex : examples) {
    total += count_loss(predict_count_distribution(ex.x, head), ex.gold_count);
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace

std::vector<EpochLog> train_stage2(std::span<const LabeledInput> train,
                                   std::span<const LabeledInput> validation,
                                   ModelBundle& bundle, const TrainConfig& config) {
  config.validate();
  bundle.validate();
  if (!bundle.stage1_trained) throw UsageError("stage 2 requires a model trained by stage 1");
  if (train.empty()) throw DataError("stage 2: empty training split");

  const std::string encoder_before = params_checksum(bundle.encoder);
  const std::string label_before = params_checksum(bundle.label_head);

  const std::vector<CountExample> train_x = count_examples(train, bundle, config);
  const std::vector<CountExample> val_x = count_examples(validation, bundle, config);
  const bool has_validation = !val_x.empty();

  OptimizerState state;
  auto params = collect_tensors(bundle.count_head, "count_head");
  const std::size_t n = train_x.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  CountHead best = bundle.count_head;
  double best_loss = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  std::vector<EpochLog> log;

  for (int epoch = 1; epoch <= config.stage2_max_epochs; ++epoch) {
    std::vector<std::size_t> order = epoch_order(n, config.seed, kCountShuffleStream, epoch);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      CountHead grads = bundle.count_head;
      for (auto& t : collect_tensors(grads)) t.map().setZero();
      for (std::size_t i = 0; i < count; ++i) {
        const CountExample& ex = train_x[order[start + i]];
        CountTrace trace;
        CountDistribution dist = predict_count_distribution(ex.x, bundle.count_head, &trace);
        const double loss = count_loss(dist, ex.gold_count);
        require_finite(loss, "stage 2", epoch, "document '" + train[order[start + i]].id + "'");
        loss_sum += loss;
        count_head_backward(trace, count_loss_logit_gradient(dist, ex.gold_count),
                            bundle.count_head, grads);
      }
      auto grad_refs = collect_tensors(grads, "count_head");
      for (auto& g : grad_refs) g.map() /= static_cast<double>(count);
      clip_gradients(grad_refs, config, "stage 2", epoch);
      adam_update(params, to_const_refs(grad_refs), state, config);
    }
    EpochLog entry;
    entry.stage = 2;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(n);
    double monitored = 0.0;
    if (has_validation) {
      entry.val_loss = mean_count_loss(val_x, bundle.count_head);
      require_finite(*entry.val_loss, "stage 2", epoch, "validation");
      monitored = *entry.val_loss;
    } else {
      monitored = mean_count_loss(train_x, bundle.count_head);
    }
    if (config.diagnostics != nullptr) *config.diagnostics << format_log_line(entry) << "\n";
    log.push_back(entry);

    if (monitored < best_loss) {
      best_loss = monitored;
      best = bundle.count_head;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.early_stop_patience) {
      if (config.diagnostics != nullptr) {
        *config.diagnostics << "stage 2 early stop after epoch " << epoch << "\n";
      }
      break;
    }
  }
  bundle.count_head = std::move(best);
  if (params_checksum(bundle.encoder) != encoder_before ||
      params_checksum(bundle.label_head) != label_before) {
    throw NumericError("stage 2 modified frozen encoder or label head parameters");
  }
  bundle.count_head_trained = true;
  return log;
}

std::vector<EpochLog> train_stage2(const DatasetSplit& splits, const EmbeddingTable& embeddings,
                                   ModelBundle& bundle, const TrainConfig& config) {
  auto train = prepare_examples(splits.train, embeddings, bundle, config.diagnostics);
  auto validation = prepare_examples(splits.validation, embeddings, bundle, config.diagnostics);
  return train_stage2(train, validation, bundle, config);
}

GradientCheckReport gradient_check(const ModelBundle& bundle,
                                   std::span<const LabeledInput> examples, double tolerance,
                                   const Stage1Backward& backward, double step,
                                   double abs_floor) {
  constexpr std::uint64_t kDropoutSeed = 0x6c3a;
  TrainConfig config;
  config.lsep_on_preactivation = false;
  const Stage1Backward& analytic_fn = backward ? backward : Stage1Backward(stage1_gradient);
  const Stage1Grads analytic = analytic_fn(bundle, examples, kDropoutSeed, config);

  ModelBundle probe = bundle;
  auto params = stage1_params(probe);
  auto grads = collect_tensors(analytic, "");

  GradientCheckReport report;
  report.tolerance = tolerance;
  for (std::size_t k = 0; k < params.size(); ++k) {
    GradientGroupReport group;
    group.name = params[k].name;
    for (Eigen::Index j = 0; j < params[k].size(); ++j) {
      double& value = params[k].data[j];
      const double original = value;
      value = original + step;
      const double plus = stage1_objective(probe, examples, kDropoutSeed, config);
      value = original - step;
      const double minus = stage1_objective(probe, examples, kDropoutSeed, config);
      value = original;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = grads[k].data[j];
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), abs_floor});
      group.max_abs_error = std::max(group.max_abs_error, abs_err);
      group.max_rel_error = std::max(group.max_rel_error, rel_err);
      ++group.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(std::move(group));
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace mlnet
