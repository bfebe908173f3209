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

#include "mlnet/heads.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlnet/errors.h"

namespace mlnet {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void fill_uniform(Eigen::Ref<MatrixXd> m, Rng& rng, double scale) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-scale, scale);
  }
}

// Membership flags for `gold`, validating the index range.
std::vector<char> relevance(std::size_t num_labels, std::span<const std::size_t> gold) {
  std::vector<char> flags(num_labels, 0);
  for (std::size_t g : gold) {
    if (g >= num_labels) {
      throw DataError("label index " + std::to_string(g) + " out of range for " +
                      std::to_string(num_labels) + " labels");
    }
    flags[g] = 1;
  }
  return flags;
}

double log_sum_exp(const std::vector<double>& values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  double total = 0.0;
  for (double v : values) total += std::exp(v - m);
  return m + std::log(total);
}

// log(1 + e^x)
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Shared core: pairs between `irrelevant` and `relevant`, with the pair sum
// multiplied by exp(log_scale).
LsepResult lsep_over(const ScoreVector& scores, const std::vector<std::size_t>& relevant,
                     const std::vector<std::size_t>& irrelevant, double log_scale) {
  LsepResult out;
  out.gradient = VectorXd::Zero(scores.size());
  if (relevant.empty() || irrelevant.empty()) return out;
  std::vector<double> pos;
  std::vector<double> neg;
  neg.reserve(irrelevant.size());
  pos.reserve(relevant.size());
  for (std::size_t v : irrelevant) neg.push_back(scores(v));
  for (std::size_t u : relevant) pos.push_back(-scores(u));
  const double log_a = log_sum_exp(neg);
  const double log_b = log_sum_exp(pos);
  const double log_pairs = log_scale + log_a + log_b;
  out.loss = softplus(log_pairs);
  const double weight = logistic(log_pairs);
  for (std::size_t v : irrelevant) out.gradient(v) += weight * std::exp(scores(v) - log_a);
  for (std::size_t u : relevant) out.gradient(u) -= weight * std::exp(-scores(u) - log_b);
  return out;
}

void partition(const ScoreVector& scores, std::span<const std::size_t> gold,
               std::vector<std::size_t>& relevant, std::vector<std::size_t>& irrelevant) {
  auto flags = relevance(static_cast<std::size_t>(scores.size()), gold);
  for (std::size_t i = 0; i < flags.size(); ++i) (flags[i] ? relevant : irrelevant).push_back(i);
}

}  // namespace

LabelScoreHead LabelScoreHead::zeros(int num_labels, int input_dim) {
  return {MatrixXd::Zero(num_labels, input_dim), VectorXd::Zero(num_labels)};
}

CountHead CountHead::zeros(int input_dim, const std::vector<int>& hidden_dims, int max_labels) {
  CountHead head;
  int in = input_dim;
  for (int width : hidden_dims) {
    head.layers.push_back({MatrixXd::Zero(width, in), VectorXd::Zero(width)});
    in = width;
  }
  head.layers.push_back({MatrixXd::Zero(max_labels, in), VectorXd::Zero(max_labels)});
  return head;
}

std::vector<int> CountHead::hidden_dims() const {
  std::vector<int> dims;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    dims.push_back(static_cast<int>(layers[i].weight.rows()));
  }
  return dims;
}

LabelScoreHead init_label_head(int num_labels, int input_dim, Rng& rng) {
  if (num_labels < 1 || input_dim < 1) throw UsageError("label head dimensions must be positive");
  LabelScoreHead head = LabelScoreHead::zeros(num_labels, input_dim);
  fill_uniform(head.weight, rng, 0.1);
  return head;
}

CountHead init_count_head(int input_dim, const std::vector<int>& hidden_dims, int max_labels,
                          Rng& rng) {
  if (max_labels < 1) throw UsageError("maximum permitted labels must be at least 1");
  for (int w : hidden_dims) {
    if (w < 1) throw UsageError("count head layer widths must be positive");
  }
  CountHead head = CountHead::zeros(input_dim, hidden_dims, max_labels);
  for (auto& layer : head.layers) fill_uniform(layer.weight, rng, 0.1);
  return head;
}

ScoreVector score_labels(const VectorXd& x, const LabelScoreHead& head, VectorXd* pre_activation) {
  if (x.size() != head.weight.cols()) {
    throw DimensionError("score_labels: document vector width " + std::to_string(x.size()) +
                         " does not match head input " + std::to_string(head.weight.cols()));
  }
  VectorXd pre = head.weight * x + head.bias;
  ScoreVector scores = pre.cwiseMax(0.0);
  if (pre_activation != nullptr) *pre_activation = std::move(pre);
  return scores;
}

VectorXd score_labels_backward(const VectorXd& x, const VectorXd& pre_activation,
                               const VectorXd& d_scores, const LabelScoreHead& head,
                               LabelScoreHead& grads, bool through_relu) {
  VectorXd d_pre = d_scores;
  if (through_relu) {
    for (Eigen::Index i = 0; i < d_pre.size(); ++i) {
      if (pre_activation(i) <= 0.0) d_pre(i) = 0.0;
    }
  }
  grads.weight.noalias() += d_pre * x.transpose();
  grads.bias += d_pre;
  return head.weight.transpose() * d_pre;
}

LsepResult lsep_with_gradient(const ScoreVector& scores, std::span<const std::size_t> gold) {
  std::vector<std::size_t> relevant;
  std::vector<std::size_t> irrelevant;
  partition(scores, gold, relevant, irrelevant);
  return lsep_over(scores, relevant, irrelevant, 0.0);
}

double lsep_loss(const ScoreVector& scores, std::span<const std::size_t> gold) {
  return lsep_with_gradient(scores, gold).loss;
}

VectorXd lsep_loss_gradient(const ScoreVector& scores, std::span<const std::size_t> gold) {
  return lsep_with_gradient(scores, gold).gradient;
}

LsepResult lsep_sampled_with_gradient(const ScoreVector& scores,
                                      std::span<const std::size_t> gold,
                                      const LsepSampling& sampling, Rng& rng) {
  if (sampling.neg_sample_size < 1) throw UsageError("negative sample size must be at least 1");
  std::vector<std::size_t> relevant;
  std::vector<std::size_t> irrelevant;
  partition(scores, gold, relevant, irrelevant);
  const std::size_t m = sampling.neg_sample_size;
  if (static_cast<std::size_t>(scores.size()) <= sampling.exact_cutoff ||
      m >= irrelevant.size() || relevant.empty()) {
    return lsep_over(scores, relevant, irrelevant, 0.0);
  }
  std::vector<std::size_t> sample;
  sample.reserve(m);
  for (std::size_t pick : rng.sample_without_replacement(irrelevant.size(), m)) {
    sample.push_back(irrelevant[pick]);
  }
  const double log_scale =
      std::log(static_cast<double>(irrelevant.size()) / static_cast<double>(m));
  return lsep_over(scores, relevant, sample, log_scale);
}

double lsep_loss_sampled(const ScoreVector& scores, std::span<const std::size_t> gold,
                         const LsepSampling& sampling, Rng& rng) {
  return lsep_sampled_with_gradient(scores, gold, sampling, rng).loss;
}

CountDistribution predict_count_distribution(const VectorXd& x, const CountHead& head,
                                             CountTrace* trace) {
  if (x.size() != head.layers.front().weight.cols()) {
    throw DimensionError("count head: document vector width " + std::to_string(x.size()) +
                         " does not match head input " +
                         std::to_string(head.layers.front().weight.cols()));
  }
  if (trace != nullptr) {
    trace->activations.clear();
    trace->pre_activations.clear();
  }
  VectorXd h = x;
  for (std::size_t i = 0; i < head.layers.size(); ++i) {
    const DenseLayer& layer = head.layers[i];
    VectorXd a = layer.weight * h + layer.bias;
    if (trace != nullptr) {
      trace->activations.push_back(h);
      trace->pre_activations.push_back(a);
    }
    h = i + 1 < head.layers.size() ? VectorXd(a.cwiseMax(0.0)) : a;
  }
  const double m = h.maxCoeff();
  VectorXd probs = (h.array() - m).exp();
  probs /= probs.sum();
  if (trace != nullptr) trace->probs = probs;
  return probs;
}

VectorXd count_head_backward(const CountTrace& trace, const VectorXd& d_logits,
                             const CountHead& head, CountHead& grads) {
  VectorXd d_pre = d_logits;
  for (std::size_t i = head.layers.size(); i-- > 0;) {
    grads.layers[i].weight.noalias() += d_pre * trace.activations[i].transpose();
    grads.layers[i].bias += d_pre;
    VectorXd d_in = head.layers[i].weight.transpose() * d_pre;
    if (i == 0) return d_in;
    const VectorXd& prev_pre = trace.pre_activations[i - 1];
    for (Eigen::Index k = 0; k < d_in.size(); ++k) {
      if (prev_pre(k) <= 0.0) d_in(k) = 0.0;
    }
    d_pre = std::move(d_in);
  }
  return d_pre;
}

double count_loss(const CountDistribution& dist, int gold_count) {
  if (gold_count < 1 || gold_count > dist.size()) {
    throw DataError("gold count " + std::to_string(gold_count) + " outside [1, " +
                    std::to_string(dist.size()) + "]");
  }
  return -std::log(dist(gold_count - 1));
}

VectorXd count_loss_logit_gradient(const CountDistribution& dist, int gold_count) {
  if (gold_count < 1 || gold_count > dist.size()) {
    throw DataError("gold count " + std::to_string(gold_count) + " outside [1, " +
                    std::to_string(dist.size()) + "]");
  }
  VectorXd g = dist;
  g(gold_count - 1) -= 1.0;
  return g;
}

int clamp_count(std::size_t raw_count, int max_labels, bool* clamped) {
  int c = static_cast<int>(std::min<std::size_t>(raw_count, static_cast<std::size_t>(max_labels)));
  if (c < 1) c = 1;
  if (clamped != nullptr) *clamped = static_cast<std::size_t>(c) != raw_count;
  return c;
}

}  // namespace mlnet
