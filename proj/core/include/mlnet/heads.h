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

#ifndef MLNET_HEADS_H_
#define MLNET_HEADS_H_

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlnet/random.h"
#include "mlnet/tensor.h"

namespace mlnet {

using ScoreVector = Eigen::VectorXd;        // length L, post-ReLU, >= 0
using CountDistribution = Eigen::VectorXd;  // probs[k] = P(count = k + 1)

struct LabelScoreHead {
  Eigen::MatrixXd weight;  // L x D
  Eigen::VectorXd bias;    // L

  static LabelScoreHead zeros(int num_labels, int input_dim);
  int num_labels() const { return static_cast<int>(weight.rows()); }
  int input_dim() const { return static_cast<int>(weight.cols()); }
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// MLP over the document vector: ReLU hidden layers, then an output layer of
// width n (the maximum permitted label count) fed to a softmax.
struct CountHead {
  std::vector<DenseLayer> layers;

  static CountHead zeros(int input_dim, const std::vector<int>& hidden_dims, int max_labels);
  int max_labels() const { return static_cast<int>(layers.back().weight.rows()); }
  int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
  std::vector<int> hidden_dims() const;
};

LabelScoreHead init_label_head(int num_labels, int input_dim, Rng& rng);
CountHead init_count_head(int input_dim, const std::vector<int>& hidden_dims, int max_labels,
                          Rng& rng);

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, LabelScoreHead>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  f(join_name(prefix, "weight"), p.weight);
  f(join_name(prefix, "bias"), p.bias);
}

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, CountHead>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string layer = join_name(prefix, ("layer" + std::to_string(i)).c_str());
    f(layer + ".weight", p.layers[i].weight);
    f(layer + ".bias", p.layers[i].bias);
  }
}

// scores = max(0, W x + b). Stores W x + b in `pre_activation` when given.
ScoreVector score_labels(const Eigen::VectorXd& x, const LabelScoreHead& head,
                         Eigen::VectorXd* pre_activation = nullptr);

// Backpropagates d(loss)/d(scores) through the ReLU (subgradient 0 at the
// kink) and the affine map. With `through_relu` false, `d_scores` is taken
// as the gradient w.r.t. the pre-activation. Returns d(loss)/dx.
Eigen::VectorXd score_labels_backward(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& pre_activation,
                                      const Eigen::VectorXd& d_scores, const LabelScoreHead& head,
                                      LabelScoreHead& grads, bool through_relu = true);

struct LsepResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // d(loss)/d(scores)
};

// log(1 + sum_{v not in Y} sum_{u in Y} exp(f_v - f_u)), evaluated through
// the factorization into two log-sum-exps so that no intermediate overflows.
// Zero when Y is empty or covers every label. `gold` holds label indices;
// duplicates are ignored and out-of-range entries throw DataError.
double lsep_loss(const ScoreVector& scores, std::span<const std::size_t> gold);
Eigen::VectorXd lsep_loss_gradient(const ScoreVector& scores, std::span<const std::size_t> gold);
LsepResult lsep_with_gradient(const ScoreVector& scores, std::span<const std::size_t> gold);

struct LsepSampling {
  std::size_t neg_sample_size = 1024;
  // At or below this label count the exact loss is used.
  std::size_t exact_cutoff = 256;
};

// LSEP with the irrelevant labels replaced by a uniform sample of size m
// (without replacement) and the pair sum rescaled by |V| / m. Exact when
// L <= exact_cutoff or m >= |V|.
double lsep_loss_sampled(const ScoreVector& scores, std::span<const std::size_t> gold,
                         const LsepSampling& sampling, Rng& rng);
LsepResult lsep_sampled_with_gradient(const ScoreVector& scores,
                                      std::span<const std::size_t> gold,
                                      const LsepSampling& sampling, Rng& rng);

struct CountTrace {
  std::vector<Eigen::VectorXd> activations;  // input of each layer
  std::vector<Eigen::VectorXd> pre_activations;
  Eigen::VectorXd probs;
};

CountDistribution predict_count_distribution(const Eigen::VectorXd& x, const CountHead& head,
                                             CountTrace* trace = nullptr);

// Returns d(loss)/dx and accumulates parameter gradients, given the
// gradient w.r.t. the output logits.
Eigen::VectorXd count_head_backward(const CountTrace& trace, const Eigen::VectorXd& d_logits,
                                    const CountHead& head, CountHead& grads);

// -log probs[gold_count - 1]. Throws DataError when gold_count lies outside
// [1, n].
double count_loss(const CountDistribution& dist, int gold_count);

// softmax - onehot: the cross-entropy gradient w.r.t. the logits.
Eigen::VectorXd count_loss_logit_gradient(const CountDistribution& dist, int gold_count);

// Maps a raw label count onto the count classes {1..n}.
int clamp_count(std::size_t raw_count, int max_labels, bool* clamped = nullptr);

}  // namespace mlnet

#endif  // MLNET_HEADS_H_
