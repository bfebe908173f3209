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

#include <benchmark/benchmark.h>

#include "mlnet/encoder.h"
#include "mlnet/random.h"

namespace {

mlnet::EncoderInput random_input(mlnet::Rng& rng, int dim, int sentences, int tokens) {
  mlnet::EncoderInput in;
  in.sentence_mask.assign(static_cast<std::size_t>(sentences), 1);
  in.token_mask.assign(static_cast<std::size_t>(sentences),
                       std::vector<std::uint8_t>(static_cast<std::size_t>(tokens), 1));
  for (int s = 0; s < sentences; ++s) {
    Eigen::MatrixXd m(dim, tokens);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    in.sentences.push_back(m);
  }
  return in;
}

mlnet::EncoderConfig config_for(int dim) {
  mlnet::EncoderConfig c;
  c.embedding_dim = dim;
  return c;
}

void BM_EncodeEval(benchmark::State& state) {
  mlnet::Rng rng(3);
  const int dim = 200;
  mlnet::EncoderParams params = mlnet::init_encoder(config_for(dim), rng);
  mlnet::EncoderInput in = random_input(rng, dim, static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlnet::encode_document(in, params, mlnet::Mode::kEval));
  }
}
BENCHMARK(BM_EncodeEval)->Args({5, 20})->Args({10, 40})->Args({20, 60});

void BM_EncodeTrainWithBackward(benchmark::State& state) {
  mlnet::Rng rng(4);
  const int dim = 200;
  mlnet::EncoderConfig config = config_for(dim);
  mlnet::EncoderParams params = mlnet::init_encoder(config, rng);
  mlnet::EncoderParams grads = mlnet::EncoderParams::zeros(config);
  mlnet::EncoderInput in = random_input(rng, dim, static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1)));
  Eigen::VectorXd d_doc = Eigen::VectorXd::Ones(params.output_dim());
  for (auto _ : state) {
    mlnet::EncoderTrace trace;
    mlnet::encode_document(in, params, mlnet::Mode::kTrain, &rng, &trace);
    mlnet::encode_document_backward(trace, d_doc, params, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_EncodeTrainWithBackward)->Args({5, 20})->Args({10, 40});

}  // namespace
