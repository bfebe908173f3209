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

#include "mlnet/encoder.h"

#include <algorithm>
#include <cmath>

#include "mlnet/errors.h"

namespace mlnet {

namespace {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

ArrayXd sigmoid(const ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

LstmDirection zero_direction(int input_dim, int hidden_dim) {
  return {MatrixXd::Zero(4 * hidden_dim, input_dim), MatrixXd::Zero(4 * hidden_dim, hidden_dim),
          VectorXd::Zero(4 * hidden_dim)};
}

void fill_uniform(Eigen::Ref<MatrixXd> m, Rng& rng, double scale) {
  // Column-major fill order fixes the draw sequence.
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-scale, scale);
  }
}

void init_direction(LstmDirection& d, int hidden_dim, Rng& rng) {
  fill_uniform(d.w_input, rng, 0.1);
  fill_uniform(d.w_hidden, rng, 0.1);
  d.bias.setZero();
  d.bias.segment(hidden_dim, hidden_dim).setOnes();
}

void init_attention(AttentionParams& a, Rng& rng) {
  fill_uniform(a.proj_weight, rng, 0.1);
  a.proj_bias.setZero();
  fill_uniform(a.context, rng, 0.1);
}

std::vector<int> active_positions(const Mask& mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

void run_direction(const MatrixXd& inputs, std::vector<int> positions, const LstmDirection& p,
                   int hidden, LstmTrace* trace, MatrixXd& out, int row_offset) {
  const Eigen::Index steps = static_cast<Eigen::Index>(positions.size());
  LstmTrace local;
  LstmTrace& tr = trace != nullptr ? *trace : local;
  tr.gates.resize(4 * hidden, steps);
  tr.cells.resize(hidden, steps);
  tr.hidden.resize(hidden, steps);
  VectorXd h = VectorXd::Zero(hidden);
  VectorXd c = VectorXd::Zero(hidden);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const int pos = positions[k];
    VectorXd z = p.w_input * inputs.col(pos) + p.w_hidden * h + p.bias;
    ArrayXd i = sigmoid(z.segment(0, hidden).array());
    ArrayXd f = sigmoid(z.segment(hidden, hidden).array());
    ArrayXd g = z.segment(2 * hidden, hidden).array().tanh();
    ArrayXd o = sigmoid(z.segment(3 * hidden, hidden).array());
    c = (f * c.array() + i * g).matrix();
    h = (o * c.array().tanh()).matrix();
    tr.gates.col(k) << i.matrix(), f.matrix(), g.matrix(), o.matrix();
    tr.cells.col(k) = c;
    tr.hidden.col(k) = h;
    out.block(row_offset, pos, hidden, 1) = h;
  }
  tr.positions = std::move(positions);
}

void backprop_direction(const MatrixXd& inputs, const LstmTrace& tr, const MatrixXd& d_outputs,
                        const LstmDirection& p, int hidden, int row_offset, LstmDirection& g,
                        MatrixXd* d_inputs) {
  const Eigen::Index steps = static_cast<Eigen::Index>(tr.positions.size());
  VectorXd dh_next = VectorXd::Zero(hidden);
  VectorXd dc_next = VectorXd::Zero(hidden);
  VectorXd zero = VectorXd::Zero(hidden);
  VectorXd dz(4 * hidden);
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    const int pos = tr.positions[k];
    const VectorXd c_prev = k > 0 ? VectorXd(tr.cells.col(k - 1)) : zero;
    const VectorXd h_prev = k > 0 ? VectorXd(tr.hidden.col(k - 1)) : zero;
    ArrayXd i = tr.gates.col(k).segment(0, hidden).array();
    ArrayXd f = tr.gates.col(k).segment(hidden, hidden).array();
    ArrayXd gg = tr.gates.col(k).segment(2 * hidden, hidden).array();
    ArrayXd o = tr.gates.col(k).segment(3 * hidden, hidden).array();
    ArrayXd tc = tr.cells.col(k).array().tanh();

    ArrayXd dh = d_outputs.block(row_offset, pos, hidden, 1).array() + dh_next.array();
    ArrayXd d_o = dh * tc;
    ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    ArrayXd d_i = dc * gg;
    ArrayXd d_g = dc * i;
    ArrayXd d_f = dc * c_prev.array();

    dz.segment(0, hidden) = (d_i * i * (1.0 - i)).matrix();
    dz.segment(hidden, hidden) = (d_f * f * (1.0 - f)).matrix();
    dz.segment(2 * hidden, hidden) = (d_g * (1.0 - gg.square())).matrix();
    dz.segment(3 * hidden, hidden) = (d_o * o * (1.0 - o)).matrix();

    g.w_input.noalias() += dz * inputs.col(pos).transpose();
    g.w_hidden.noalias() += dz * h_prev.transpose();
    g.bias += dz;
    if (d_inputs != nullptr) d_inputs->col(pos).noalias() += p.w_input.transpose() * dz;
    dh_next.noalias() = p.w_hidden.transpose() * dz;
    dc_next = (dc * f).matrix();
  }
}

VectorXd dropout_mask(Eigen::Index size, double rate, Rng& rng) {
  VectorXd m = VectorXd::Ones(size);
  if (rate <= 0.0) return m;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < size; ++i) m(i) = rng.uniform() < rate ? 0.0 : keep_scale;
  return m;
}

}  // namespace

RecurrentLayerParams RecurrentLayerParams::zeros(int input_dim, int hidden_dim) {
  return {input_dim, hidden_dim, zero_direction(input_dim, hidden_dim),
          zero_direction(input_dim, hidden_dim)};
}

AttentionParams AttentionParams::zeros(int input_dim, int attention_dim) {
  return {MatrixXd::Zero(attention_dim, input_dim), VectorXd::Zero(attention_dim),
          VectorXd::Zero(attention_dim)};
}

EncoderParams EncoderParams::zeros(const EncoderConfig& config) {
  EncoderParams p;
  p.word_rnn = RecurrentLayerParams::zeros(config.embedding_dim, config.word_hidden);
  p.word_att = AttentionParams::zeros(2 * config.word_hidden, config.word_attention);
  p.sent_rnn = RecurrentLayerParams::zeros(2 * config.word_hidden, config.sentence_hidden);
  p.sent_att = AttentionParams::zeros(2 * config.sentence_hidden, config.sentence_attention);
  p.dropout_rate = config.dropout_rate;
  return p;
}

EncoderParams init_encoder(const EncoderConfig& config, Rng& rng) {
  if (config.embedding_dim < 1 || config.word_hidden < 1 || config.sentence_hidden < 1 ||
      config.word_attention < 1 || config.sentence_attention < 1) {
    throw UsageError("encoder dimensions must be positive");
  }
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0) {
    throw UsageError("dropout rate must lie in [0, 1)");
  }
  EncoderParams p = EncoderParams::zeros(config);
  init_direction(p.word_rnn.forward, config.word_hidden, rng);
  init_direction(p.word_rnn.backward, config.word_hidden, rng);
  init_attention(p.word_att, rng);
  init_direction(p.sent_rnn.forward, config.sentence_hidden, rng);
  init_direction(p.sent_rnn.backward, config.sentence_hidden, rng);
  init_attention(p.sent_att, rng);
  return p;
}

MatrixXd birnn_forward(const MatrixXd& inputs, const Mask& mask,
                       const RecurrentLayerParams& params, BirnnTrace* trace) {
  if (static_cast<Eigen::Index>(mask.size()) != inputs.cols()) {
    throw DimensionError("birnn: mask length does not match sequence length");
  }
  if (inputs.rows() != params.input_dim) {
    throw DimensionError("birnn: input width " + std::to_string(inputs.rows()) +
                         " does not match layer input " + std::to_string(params.input_dim));
  }
  std::vector<int> positions = active_positions(mask);
  if (positions.empty()) throw DegenerateInputError("birnn: every position is masked");
  const int hidden = params.hidden_dim;
  MatrixXd out = MatrixXd::Zero(2 * hidden, inputs.cols());
  std::vector<int> reversed(positions.rbegin(), positions.rend());
  run_direction(inputs, std::move(positions), params.forward, hidden,
                trace ? &trace->forward : nullptr, out, 0);
  run_direction(inputs, std::move(reversed), params.backward, hidden,
                trace ? &trace->backward : nullptr, out, hidden);
  if (trace != nullptr) trace->inputs = inputs;
  return out;
}

void birnn_backward(const BirnnTrace& trace, const MatrixXd& d_outputs,
                    const RecurrentLayerParams& params, RecurrentLayerParams& grads,
                    MatrixXd* d_inputs) {
  if (d_inputs != nullptr) *d_inputs = MatrixXd::Zero(trace.inputs.rows(), trace.inputs.cols());
  const int hidden = params.hidden_dim;
  backprop_direction(trace.inputs, trace.forward, d_outputs, params.forward, hidden, 0,
                     grads.forward, d_inputs);
  backprop_direction(trace.inputs, trace.backward, d_outputs, params.backward, hidden, hidden,
                     grads.backward, d_inputs);
}

AttentionResult attention_pool(const MatrixXd& states, const Mask& mask,
                               const AttentionParams& params, AttentionTrace* trace) {
  if (static_cast<Eigen::Index>(mask.size()) != states.cols()) {
    throw DimensionError("attention: mask length does not match sequence length");
  }
  if (states.rows() != params.proj_weight.cols()) {
    throw DimensionError("attention: state width does not match projection");
  }
  std::vector<int> active = active_positions(mask);
  if (active.empty()) throw DegenerateInputError("attention: every position is masked");

  MatrixXd projected = ((params.proj_weight * states).colwise() + params.proj_bias).array().tanh();
  VectorXd weights = VectorXd::Zero(states.cols());
  double max_score = -std::numeric_limits<double>::infinity();
  for (int t : active) {
    weights(t) = params.context.dot(projected.col(t));
    max_score = std::max(max_score, weights(t));
  }
  double total = 0.0;
  for (int t : active) {
    weights(t) = std::exp(weights(t) - max_score);
    total += weights(t);
  }
  for (int t : active) weights(t) /= total;

  AttentionResult result{states * weights, weights};
  if (trace != nullptr) {
    trace->states = states;
    trace->projected = std::move(projected);
    trace->weights = weights;
    trace->mask = mask;
  }
  return result;
}

MatrixXd attention_backward(const AttentionTrace& trace, const VectorXd& d_pooled,
                            const AttentionParams& params, AttentionParams& grads) {
  const auto& states = trace.states;
  const auto& alpha = trace.weights;
  MatrixXd d_states = MatrixXd::Zero(states.rows(), states.cols());
  std::vector<int> active = active_positions(trace.mask);

  VectorXd d_alpha = VectorXd::Zero(states.cols());
  double weighted = 0.0;
  for (int t : active) {
    d_states.col(t) = alpha(t) * d_pooled;
    d_alpha(t) = states.col(t).dot(d_pooled);
    weighted += alpha(t) * d_alpha(t);
  }
  for (int t : active) {
    const double d_score = alpha(t) * (d_alpha(t) - weighted);
    auto u = trace.projected.col(t);
    grads.context += d_score * u;
    VectorXd dz = (d_score * params.context.array() * (1.0 - u.array().square())).matrix();
    grads.proj_weight.noalias() += dz * states.col(t).transpose();
    grads.proj_bias += dz;
    d_states.col(t).noalias() += params.proj_weight.transpose() * dz;
  }
  return d_states;
}

DocumentVector encode_document(const EncoderInput& input, const EncoderParams& params,
                               Mode mode, Rng* rng, EncoderTrace* trace) {
  if (mode == Mode::kTrain && rng == nullptr) {
    throw UsageError("encode_document: train mode requires a random generator");
  }
  if (input.dim() != params.word_rnn.input_dim) {
    throw DimensionError("encode_document: embedding width " + std::to_string(input.dim()) +
                         " does not match encoder input " +
                         std::to_string(params.word_rnn.input_dim));
  }
  const int s_max = input.s_max();
  const int sent_width = params.word_rnn.output_dim();
  MatrixXd sentence_vectors = MatrixXd::Zero(sent_width, s_max);
  std::vector<int> retained = active_positions(input.sentence_mask);
  if (retained.empty()) throw DegenerateInputError("encode_document: no retained sentences");

  if (trace != nullptr) {
    *trace = EncoderTrace{};
    trace->mode = mode;
    trace->sentences = retained;
    trace->word_rnn.resize(retained.size());
    trace->word_att.resize(retained.size());
  }
  for (std::size_t k = 0; k < retained.size(); ++k) {
    const int s = retained[k];
    MatrixXd states = birnn_forward(input.sentences[s], input.token_mask[s], params.word_rnn,
                                    trace ? &trace->word_rnn[k] : nullptr);
    VectorXd pooled = attention_pool(states, input.token_mask[s], params.word_att,
                                     trace ? &trace->word_att[k] : nullptr)
                          .pooled;
    if (mode == Mode::kTrain) {
      VectorXd m = dropout_mask(sent_width, params.dropout_rate, *rng);
      pooled.array() *= m.array();
      if (trace != nullptr) trace->word_dropout.push_back(std::move(m));
    }
    sentence_vectors.col(s) = pooled;
  }

  MatrixXd sent_states = birnn_forward(sentence_vectors, input.sentence_mask, params.sent_rnn,
                                       trace ? &trace->sent_rnn : nullptr);
  VectorXd document = attention_pool(sent_states, input.sentence_mask, params.sent_att,
                                     trace ? &trace->sent_att : nullptr)
                          .pooled;
  if (mode == Mode::kTrain) {
    VectorXd m = dropout_mask(document.size(), params.dropout_rate, *rng);
    document.array() *= m.array();
    if (trace != nullptr) trace->sent_dropout = std::move(m);
  }
  return document;
}

void encode_document_backward(const EncoderTrace& trace, const VectorXd& d_document,
                              const EncoderParams& params, EncoderParams& grads) {
  VectorXd d_doc = d_document;
  if (trace.mode == Mode::kTrain) d_doc.array() *= trace.sent_dropout.array();
  MatrixXd d_sent_states = attention_backward(trace.sent_att, d_doc, params.sent_att, grads.sent_att);
  MatrixXd d_sentence_vectors;
  birnn_backward(trace.sent_rnn, d_sent_states, params.sent_rnn, grads.sent_rnn,
                 &d_sentence_vectors);
  for (std::size_t k = 0; k < trace.sentences.size(); ++k) {
    VectorXd d_pooled = d_sentence_vectors.col(trace.sentences[k]);
    if (trace.mode == Mode::kTrain) d_pooled.array() *= trace.word_dropout[k].array();
    MatrixXd d_states =
        attention_backward(trace.word_att[k], d_pooled, params.word_att, grads.word_att);
    // Embeddings are frozen, so the word-level input gradient is not needed.
    birnn_backward(trace.word_rnn[k], d_states, params.word_rnn, grads.word_rnn, nullptr);
  }
}

}  // namespace mlnet
