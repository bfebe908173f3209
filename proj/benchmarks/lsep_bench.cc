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

#include <numeric>
#include <vector>

#include "mlnet/heads.h"
#include "mlnet/random.h"

namespace {

mlnet::ScoreVector random_scores(mlnet::Rng& rng, int n) {
  mlnet::ScoreVector s(n);
  for (int i = 0; i < n; ++i) s(i) = rng.uniform(0.0, 3.0);
  return s;
}

void BM_LsepWithGradient(benchmark::State& state) {
  const int labels = static_cast<int>(state.range(0));
  mlnet::Rng rng(1);
  mlnet::ScoreVector scores = random_scores(rng, labels);
  std::vector<std::size_t> gold(static_cast<std::size_t>(labels / 4 + 1));
  std::iota(gold.begin(), gold.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlnet::lsep_with_gradient(scores, gold));
  }
  state.SetComplexityN(labels);
}
BENCHMARK(BM_LsepWithGradient)->RangeMultiplier(4)->Range(8, 2048)->Complexity();

void BM_LsepSampled(benchmark::State& state) {
  const int labels = static_cast<int>(state.range(0));
  mlnet::Rng rng(2);
  mlnet::ScoreVector scores = random_scores(rng, labels);
  std::vector<std::size_t> gold = {0, 1, 2};
  mlnet::LsepSampling sampling{.neg_sample_size = 64, .exact_cutoff = 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlnet::lsep_sampled_with_gradient(scores, gold, sampling, rng));
  }
}
BENCHMARK(BM_LsepSampled)->RangeMultiplier(4)->Range(128, 8192);

}  // namespace
