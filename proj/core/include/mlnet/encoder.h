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

#ifndef MLNET_ENCODER_H_
#define MLNET_ENCODER_H_

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlnet/preprocess.h"
#include "mlnet/random.h"
#include "mlnet/tensor.h"

namespace mlnet {

using Mask = std::vector<std::uint8_t>;

// One direction of an LSTM layer. Gate blocks are stacked in the order
// input, forget, cell candidate, output.
struct LstmDirection {
  Eigen::MatrixXd w_input;   // 4H x I
  Eigen::MatrixXd w_hidden;  // 4H x H
  Eigen::VectorXd bias;      // 4H
};

struct RecurrentLayerParams {
  int input_dim = 0;
  int hidden_dim = 0;
  LstmDirection forward;
  LstmDirection backward;

  static RecurrentLayerParams zeros(int input_dim, int hidden_dim);
  int output_dim() const { return 2 * hidden_dim; }
};

// Additive attention: u_t = tanh(W h_t + b), score_t = context . u_t.
struct AttentionParams {
  Eigen::MatrixXd proj_weight;  // A x in
  Eigen::VectorXd proj_bias;    // A
  Eigen::VectorXd context;      // A

  static AttentionParams zeros(int input_dim, int attention_dim);
};

struct EncoderConfig {
  int embedding_dim = 200;
  int word_hidden = 50;
  int word_attention = 50;
  int sentence_hidden = 50;
  int sentence_attention = 50;
  double dropout_rate = 0.5;
};

struct EncoderParams {
  RecurrentLayerParams word_rnn;
  AttentionParams word_att;
  RecurrentLayerParams sent_rnn;
  AttentionParams sent_att;
  double dropout_rate = 0.5;

  static EncoderParams zeros(const EncoderConfig& config);
  int output_dim() const { return sent_rnn.output_dim(); }
};

using DocumentVector = Eigen::VectorXd;

// Weights uniform in [-0.1, 0.1], biases zero, forget-gate bias 1.
EncoderParams init_encoder(const EncoderConfig& config, Rng& rng);

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, LstmDirection>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  f(join_name(prefix, "w_input"), p.w_input);
  f(join_name(prefix, "w_hidden"), p.w_hidden);
  f(join_name(prefix, "bias"), p.bias);
}

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, RecurrentLayerParams>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  for_each_tensor(p.forward, join_name(prefix, "fw"), f);
  for_each_tensor(p.backward, join_name(prefix, "bw"), f);
}

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, AttentionParams>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  f(join_name(prefix, "proj_weight"), p.proj_weight);
  f(join_name(prefix, "proj_bias"), p.proj_bias);
  f(join_name(prefix, "context"), p.context);
}

template <class P, class F>
  requires std::same_as<std::remove_const_t<P>, EncoderParams>
void for_each_tensor(P& p, const std::string& prefix, F&& f) {
  for_each_tensor(p.word_rnn, join_name(prefix, "word_rnn"), f);
  for_each_tensor(p.word_att, join_name(prefix, "word_att"), f);
  for_each_tensor(p.sent_rnn, join_name(prefix, "sent_rnn"), f);
  for_each_tensor(p.sent_att, join_name(prefix, "sent_att"), f);
}

// Intermediate values recorded by birnn_forward for the backward pass.
struct LstmTrace {
  std::vector<int> positions;  // processed positions, in processing order
  Eigen::MatrixXd gates;       // 4H x steps, post-activation
  Eigen::MatrixXd cells;       // H x steps
  Eigen::MatrixXd hidden;      // H x steps
};

struct BirnnTrace {
  Eigen::MatrixXd inputs;
  LstmTrace forward;
  LstmTrace backward;
};

// Bidirectional LSTM over the columns of `inputs` (I x T). Returns 2H x T:
// forward state stacked over backward state. Masked columns produce zeros
// and do not advance either recurrence. Throws DegenerateInputError when
// every position is masked.
Eigen::MatrixXd birnn_forward(const Eigen::MatrixXd& inputs, const Mask& mask,
                              const RecurrentLayerParams& params,
                              BirnnTrace* trace = nullptr);

// Accumulates parameter gradients into `grads`. Writes the input gradient to
// `d_inputs` when non-null.
void birnn_backward(const BirnnTrace& trace, const Eigen::MatrixXd& d_outputs,
                    const RecurrentLayerParams& params, RecurrentLayerParams& grads,
                    Eigen::MatrixXd* d_inputs);

struct AttentionResult {
  Eigen::VectorXd pooled;
  Eigen::VectorXd weights;  // zero at masked positions
};

struct AttentionTrace {
  Eigen::MatrixXd states;
  Eigen::MatrixXd projected;  // tanh(W h + b), A x T
  Eigen::VectorXd weights;
  Mask mask;
};

AttentionResult attention_pool(const Eigen::MatrixXd& states, const Mask& mask,
                               const AttentionParams& params,
                               AttentionTrace* trace = nullptr);

// Returns d(states) and accumulates into `grads`.
Eigen::MatrixXd attention_backward(const AttentionTrace& trace, const Eigen::VectorXd& d_pooled,
                                   const AttentionParams& params, AttentionParams& grads);

enum class Mode { kTrain, kEval };

struct EncoderTrace {
  std::vector<int> sentences;  // retained sentence indices
  std::vector<BirnnTrace> word_rnn;
  std::vector<AttentionTrace> word_att;
  std::vector<Eigen::VectorXd> word_dropout;  // empty in eval mode
  BirnnTrace sent_rnn;
  AttentionTrace sent_att;
  Eigen::VectorXd sent_dropout;
  Mode mode = Mode::kEval;
};

// Word-level BiLSTM + attention per retained sentence, dropout on each
// sentence vector, sentence-level BiLSTM + attention, dropout on the
// document vector. Dropout is inverted and only active in train mode, where
// `rng` is required.
DocumentVector encode_document(const EncoderInput& input, const EncoderParams& params,
                               Mode mode, Rng* rng = nullptr, EncoderTrace* trace = nullptr);

void encode_document_backward(const EncoderTrace& trace, const Eigen::VectorXd& d_document,
                              const EncoderParams& params, EncoderParams& grads);

}  // namespace mlnet

#endif  // MLNET_ENCODER_H_
