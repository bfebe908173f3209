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

#include <cmath>
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "mlnet/encoder.h"
#include "mlnet/errors.h"
#include "mlnet/model.h"
#include "mlnet/random.h"

namespace mlnet {
namespace {

void fill(Eigen::MatrixXd& m, Rng& rng, double scale = 0.5) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
}
void fill(Eigen::VectorXd& v, Rng& rng, double scale = 0.5) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-scale, scale);
}

RecurrentLayerParams random_rnn(int in, int hidden, Rng& rng) {
  RecurrentLayerParams p = RecurrentLayerParams::zeros(in, hidden);
  for (LstmDirection* d : {&p.forward, &p.backward}) {
    fill(d->w_input, rng);
    fill(d->w_hidden, rng);
    fill(d->bias, rng);
  }
  return p;
}

AttentionParams random_attention(int in, int att, Rng& rng) {
  AttentionParams p = AttentionParams::zeros(in, att);
  fill(p.proj_weight, rng);
  fill(p.proj_bias, rng);
  fill(p.context, rng, 1.0);
  return p;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// One direction of the LSTM, one scalar at a time.
std::vector<std::vector<double>> scalar_lstm(const LstmDirection& d, int hidden,
                                             const Eigen::MatrixXd& x,
                                             const std::vector<int>& order) {
  const int in = static_cast<int>(x.rows());
  std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(x.cols()),
                                       std::vector<double>(hidden, 0.0));
  for (int t : order) {
    std::vector<double> z(4 * hidden);
    for (int r = 0; r < 4 * hidden; ++r) {
      double s = d.bias(r);
      for (int k = 0; k < in; ++k) s += d.w_input(r, k) * x(k, t);
      for (int k = 0; k < hidden; ++k) s += d.w_hidden(r, k) * h[k];
      z[r] = s;
    }
    std::vector<double> nh(hidden);
    for (int j = 0; j < hidden; ++j) {
      double i = sigmoid(z[j]);
      double f = sigmoid(z[hidden + j]);
      double g = std::tanh(z[2 * hidden + j]);
      double o = sigmoid(z[3 * hidden + j]);
      c[j] = f * c[j] + i * g;
      nh[j] = o * std::tanh(c[j]);
    }
    h = nh;
    out[static_cast<std::size_t>(t)] = h;
  }
  return out;
}

TEST(Birnn, ZeroParametersGiveZeroOutput) {
  Rng rng(1);
  Eigen::MatrixXd x(3, 4);
  fill(x, rng);
  auto out = birnn_forward(x, {1, 1, 1, 1}, RecurrentLayerParams::zeros(3, 2));
  EXPECT_EQ(out, Eigen::MatrixXd::Zero(4, 4));
}

TEST(Birnn, MatchesScalarReference) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int in = 2 + static_cast<int>(rng.below(3));
    const int hidden = 1 + static_cast<int>(rng.below(4));
    const int steps = 3 + static_cast<int>(rng.below(3));
    auto p = random_rnn(in, hidden, rng);
    Eigen::MatrixXd x(in, steps);
    fill(x, rng, 1.0);
    Mask mask(static_cast<std::size_t>(steps), 1);
    if (trial % 2 == 1) mask[1] = 0;

    std::vector<int> fw, bw;
    for (int t = 0; t < steps; ++t) {
      if (mask[static_cast<std::size_t>(t)]) fw.push_back(t);
    }
    bw.assign(fw.rbegin(), fw.rend());
    auto hf = scalar_lstm(p.forward, hidden, x, fw);
    auto hb = scalar_lstm(p.backward, hidden, x, bw);

    auto out = birnn_forward(x, mask, p);
    ASSERT_EQ(out.rows(), 2 * hidden);
    ASSERT_EQ(out.cols(), steps);
    for (int t = 0; t < steps; ++t) {
      for (int j = 0; j < hidden; ++j) {
        const bool on = mask[static_cast<std::size_t>(t)] != 0;
        EXPECT_NEAR(out(j, t), on ? hf[t][j] : 0.0, 1e-10);
        EXPECT_NEAR(out(hidden + j, t), on ? hb[t][j] : 0.0, 1e-10);
      }
    }
  }
}

TEST(Birnn, SinglePositionUsesOneStepEachWay) {
  Rng rng(3);
  auto p = random_rnn(2, 3, rng);
  Eigen::MatrixXd x(2, 3);
  fill(x, rng);
  auto out = birnn_forward(x, {0, 1, 0}, p);
  auto hf = scalar_lstm(p.forward, 3, x, {1});
  auto hb = scalar_lstm(p.backward, 3, x, {1});
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(out(j, 1), hf[1][j], 1e-12);
    EXPECT_NEAR(out(3 + j, 1), hb[1][j], 1e-12);
  }
}

TEST(Birnn, AllMaskedIsDegenerate) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_THROW(birnn_forward(x, {0, 0}, RecurrentLayerParams::zeros(2, 2)), DegenerateInputError);
}

TEST(Birnn, InputAndParameterGradientsMatchFiniteDifferences) {
  Rng rng(4);
  const int in = 3, hidden = 2, steps = 4;
  auto p = random_rnn(in, hidden, rng);
  Eigen::MatrixXd x(in, steps);
  fill(x, rng, 1.0);
  Mask mask = {1, 1, 0, 1};
  Eigen::MatrixXd w(2 * hidden, steps);
  fill(w, rng, 1.0);
  auto objective = [&](const RecurrentLayerParams& q, const Eigen::MatrixXd& xx) {
    return (birnn_forward(xx, mask, q).array() * w.array()).sum();
  };

  BirnnTrace trace;
  birnn_forward(x, mask, p, &trace);
  RecurrentLayerParams grads = RecurrentLayerParams::zeros(in, hidden);
  Eigen::MatrixXd dx;
  birnn_backward(trace, w, p, grads, &dx);

  const double h = 1e-5;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::MatrixXd a = x, b = x;
    a.data()[i] += h;
    b.data()[i] -= h;
    EXPECT_NEAR(dx.data()[i], (objective(p, a) - objective(p, b)) / (2 * h), 1e-7);
  }
  for (Eigen::Index i = 0; i < p.backward.w_hidden.size(); ++i) {
    auto a = p, b = p;
    a.backward.w_hidden.data()[i] += h;
    b.backward.w_hidden.data()[i] -= h;
    EXPECT_NEAR(grads.backward.w_hidden.data()[i], (objective(a, x) - objective(b, x)) / (2 * h),
                1e-7);
  }
}

TEST(Attention, SingletonAndSymmetry) {
  Rng rng(5);
  auto p = random_attention(3, 2, rng);
  Eigen::MatrixXd s(3, 3);
  fill(s, rng);
  auto one = attention_pool(s, {0, 1, 0}, p);
  EXPECT_EQ(one.weights(1), 1.0);
  EXPECT_EQ(one.weights(0), 0.0);
  EXPECT_TRUE(one.pooled.isApprox(s.col(1), 1e-15));

  Eigen::MatrixXd twin(3, 2);
  twin.col(0) = s.col(0);
  twin.col(1) = s.col(0);
  auto half = attention_pool(twin, {1, 1}, p);
  EXPECT_DOUBLE_EQ(half.weights(0), 0.5);
  EXPECT_DOUBLE_EQ(half.weights(1), 0.5);
}

TEST(Attention, MatchesDirectSoftmax) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_attention(4, 3, rng);
    Eigen::MatrixXd s(4, 4);
    fill(s, rng, 2.0);
    Mask mask = {1, 1, 1, 1};
    mask[rng.below(4)] = static_cast<std::uint8_t>(trial % 2);
    std::vector<double> e(4, 0.0);
    double z = 0.0;
    for (int t = 0; t < 4; ++t) {
      if (!mask[static_cast<std::size_t>(t)]) continue;
      double score = 0.0;
      for (int a = 0; a < 3; ++a) {
        double u = p.proj_bias(a);
        for (int k = 0; k < 4; ++k) u += p.proj_weight(a, k) * s(k, t);
        score += p.context(a) * std::tanh(u);
      }
      e[t] = std::exp(score);
      z += e[t];
    }
    auto got = attention_pool(s, mask, p);
    Eigen::VectorXd pooled = Eigen::VectorXd::Zero(4);
    double total = 0.0;
    for (int t = 0; t < 4; ++t) {
      const double w = e[t] / z;
      EXPECT_NEAR(got.weights(t), w, 1e-10);
      EXPECT_GE(got.weights(t), 0.0);
      pooled += w * s.col(t);
      total += got.weights(t);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LT((got.pooled - pooled).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Attention, BackwardMatchesFiniteDifferences) {
  Rng rng(7);
  auto p = random_attention(3, 2, rng);
  Eigen::MatrixXd s(3, 4);
  fill(s, rng, 1.0);
  Mask mask = {1, 0, 1, 1};
  Eigen::VectorXd w(3);
  fill(w, rng, 1.0);
  auto objective = [&](const AttentionParams& q, const Eigen::MatrixXd& ss) {
    return attention_pool(ss, mask, q).pooled.dot(w);
  };
  AttentionTrace trace;
  attention_pool(s, mask, p, &trace);
  AttentionParams grads = AttentionParams::zeros(3, 2);
  Eigen::MatrixXd ds = attention_backward(trace, w, p, grads);
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Eigen::MatrixXd a = s, b = s;
    a.data()[i] += h;
    b.data()[i] -= h;
    EXPECT_NEAR(ds.data()[i], (objective(p, a) - objective(p, b)) / (2 * h), 1e-8);
  }
  for (Eigen::Index i = 0; i < p.context.size(); ++i) {
    auto a = p, b = p;
    a.context(i) += h;
    b.context(i) -= h;
    EXPECT_NEAR(grads.context(i), (objective(a, s) - objective(b, s)) / (2 * h), 1e-8);
  }
}

EncoderConfig tiny_config(double dropout) {
  EncoderConfig c;
  c.embedding_dim = 3;
  c.word_hidden = 2;
  c.word_attention = 2;
  c.sentence_hidden = 3;
  c.sentence_attention = 2;
  c.dropout_rate = dropout;
  return c;
}

EncoderInput random_input(Rng& rng, int s_max, int t_max, int dim, int sentences) {
  EncoderInput in;
  for (int s = 0; s < s_max; ++s) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, t_max);
    std::vector<std::uint8_t> tm(static_cast<std::size_t>(t_max), 0);
    if (s < sentences) {
      const int len = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(t_max)));
      for (int t = 0; t < len; ++t) {
        tm[static_cast<std::size_t>(t)] = 1;
        for (int k = 0; k < dim; ++k) m(k, t) = rng.uniform(-1.0, 1.0);
      }
    }
    in.sentences.push_back(m);
    in.token_mask.push_back(tm);
    in.sentence_mask.push_back(s < sentences ? 1 : 0);
  }
  return in;
}

TEST(EncodeDocument, ShapesAndEvalDeterminism) {
  Rng rng(8);
  for (int hidden : {1, 2, 5}) {
    auto cfg = tiny_config(0.5);
    cfg.sentence_hidden = hidden;
    Rng init(9);
    EncoderParams p = init_encoder(cfg, init);
    EXPECT_EQ(p.word_rnn.output_dim(), 2 * cfg.word_hidden);
    auto in = random_input(rng, 3, 4, 3, 2);
    DocumentVector a = encode_document(in, p, Mode::kEval);
    DocumentVector b = encode_document(in, p, Mode::kEval);
    ASSERT_EQ(a.size(), 2 * hidden);
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()), 0);
  }
}

TEST(EncodeDocument, OneSentenceReducesToLengthOneSequence) {
  Rng rng(10);
  Rng init(11);
  EncoderParams p = init_encoder(tiny_config(0.0), init);
  auto in = random_input(rng, 3, 5, 3, 1);
  Eigen::MatrixXd words = birnn_forward(in.sentences[0], in.token_mask[0], p.word_rnn);
  Eigen::VectorXd sentence = attention_pool(words, in.token_mask[0], p.word_att).pooled;
  Eigen::MatrixXd seq = sentence;
  Eigen::MatrixXd states = birnn_forward(seq, {1}, p.sent_rnn);
  Eigen::VectorXd want = attention_pool(states, {1}, p.sent_att).pooled;
  EXPECT_LT((encode_document(in, p, Mode::kEval) - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EncodeDocument, PaddingContentIsIgnored) {
  Rng rng(12);
  Rng init(13);
  EncoderParams p = init_encoder(tiny_config(0.3), init);
  for (int trial = 0; trial < 20; ++trial) {
    auto in = random_input(rng, 4, 5, 3, 2);
    DocumentVector base = encode_document(in, p, Mode::kEval);
    auto noisy = in;
    for (std::size_t s = 0; s < noisy.sentences.size(); ++s) {
      for (int t = 0; t < 5; ++t) {
        const bool masked = !noisy.sentence_mask[s] || !noisy.token_mask[s][static_cast<std::size_t>(t)];
        if (!masked) continue;
        for (int k = 0; k < 3; ++k) noisy.sentences[s](k, t) = rng.uniform(-9.0, 9.0);
      }
    }
    EXPECT_EQ(encode_document(noisy, p, Mode::kEval), base);
  }
}

TEST(EncodeDocument, DropoutOnlyInTrainMode) {
  Rng rng(14);
  Rng init(15);
  auto in = random_input(rng, 3, 4, 3, 3);
  EncoderParams none = init_encoder(tiny_config(0.0), init);
  Rng r0(1);
  EXPECT_EQ(encode_document(in, none, Mode::kTrain, &r0), encode_document(in, none, Mode::kEval));

  EncoderParams half = none;
  half.dropout_rate = 0.5;
  Rng r1(1), r2(1), r3(2);
  DocumentVector a = encode_document(in, half, Mode::kTrain, &r1);
  DocumentVector b = encode_document(in, half, Mode::kTrain, &r2);
  DocumentVector c = encode_document(in, half, Mode::kTrain, &r3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(encode_document(in, half, Mode::kEval), encode_document(in, none, Mode::kEval));
  // Surviving document-vector units are scaled by 1 / (1 - rate).
  EncoderTrace trace;
  Rng r4(3);
  encode_document(in, half, Mode::kTrain, &r4, &trace);
  for (Eigen::Index i = 0; i < trace.sent_dropout.size(); ++i) {
    EXPECT_TRUE(trace.sent_dropout(i) == 0.0 || trace.sent_dropout(i) == 2.0);
  }
}

TEST(EncodeDocument, BackwardMatchesFiniteDifferencesForEveryTensor) {
  Rng rng(16);
  Rng init(17);
  EncoderParams p = init_encoder(tiny_config(0.0), init);
  for_each_tensor(p, "", [&](const std::string&, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-0.6, 0.6);
  });
  auto in = random_input(rng, 3, 4, 3, 3);
  Eigen::VectorXd w(p.output_dim());
  fill(w, rng, 1.0);

  EncoderTrace trace;
  encode_document(in, p, Mode::kEval, nullptr, &trace);
  EncoderParams grads = EncoderParams::zeros(tiny_config(0.0));
  encode_document_backward(trace, w, p, grads);

  std::vector<Eigen::Map<Eigen::VectorXd>> param_views;
  std::vector<const double*> grad_views;
  for_each_tensor(p, "", [&](const std::string&, auto& t) {
    param_views.emplace_back(t.data(), t.size());
  });
  for_each_tensor(grads, "", [&](const std::string&, auto& t) { grad_views.push_back(t.data()); });
  ASSERT_EQ(param_views.size(), grad_views.size());

  const double h = 1e-5;
  for (std::size_t k = 0; k < param_views.size(); ++k) {
    for (Eigen::Index i = 0; i < param_views[k].size(); ++i) {
      const double saved = param_views[k](i);
      param_views[k](i) = saved + h;
      const double up = encode_document(in, p, Mode::kEval).dot(w);
      param_views[k](i) = saved - h;
      const double down = encode_document(in, p, Mode::kEval).dot(w);
      param_views[k](i) = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grad_views[k][i];
      EXPECT_LE(std::abs(analytic - numeric), 1e-3 * std::max({std::abs(numeric), std::abs(analytic), 1e-6}))
          << "tensor " << k << " element " << i;
    }
  }
}

}  // namespace
}  // namespace mlnet
