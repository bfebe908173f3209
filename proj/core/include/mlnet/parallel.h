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

#ifndef MLNET_PARALLEL_H_
#define MLNET_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace mlnet {

// Worker count from MLNET_THREADS (default 1, i.e. sequential).
std::size_t configured_threads();

// Runs body(i) for i in [0, n) across up to `threads` workers. Each index is
// visited exactly once; callers write results into per-index slots and reduce
// in index order afterwards, which keeps results independent of scheduling.
// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace mlnet

#endif  // MLNET_PARALLEL_H_
