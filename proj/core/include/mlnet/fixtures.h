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

#ifndef MLNET_FIXTURES_H_
#define MLNET_FIXTURES_H_

#include <cstdint>
#include <vector>

#include "mlnet/model.h"
#include "mlnet/trainer.h"

namespace mlnet {

// A small randomized model plus documents for gradient verification: at
// most 3 sentences of at most 5 tokens, at most 6 labels, and widths of a
// few units. Parameters are drawn wider than the training initialization
// (and label biases shifted positive) so that most scores sit away from the
// ReLU kink and every gradient path carries signal.
struct GradientFixture {
  ModelBundle bundle;
  std::vector<LabeledInput> examples;
};

GradientFixture make_gradient_fixture(std::uint64_t seed, std::size_t num_docs = 2);

}  // namespace mlnet

#endif  // MLNET_FIXTURES_H_
