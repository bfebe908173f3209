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

#ifndef MLNET_TENSOR_H_
#define MLNET_TENSOR_H_

#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace mlnet {

// Named view of a parameter tensor's storage. Eigen storage is column-major;
// serialization and checksums go through these views so every consumer
// agrees on element order.
template <class T>
struct BasicTensorRef {
  std::string name;
  T* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<std::conditional_t<std::is_const_v<T>, const Eigen::MatrixXd, Eigen::MatrixXd>>
  map() const {
    return {data, rows, cols};
  }
};

using TensorRef = BasicTensorRef<double>;
using ConstTensorRef = BasicTensorRef<const double>;

// Collects a parameter struct's tensors via its for_each_tensor overload.
// Constness of the struct carries into the returned views.
template <class P>
auto collect_tensors(P& params, const std::string& prefix = "") {
  using Elem = std::conditional_t<std::is_const_v<P>, const double, double>;
  std::vector<BasicTensorRef<Elem>> out;
  for_each_tensor(params, prefix, [&](const std::string& name, auto& tensor) {
    out.push_back({name, tensor.data(), tensor.rows(), tensor.cols()});
  });
  return out;
}

inline std::string join_name(const std::string& prefix, const char* leaf) {
  return prefix.empty() ? std::string(leaf) : prefix + "." + leaf;
}

}  // namespace mlnet

#endif  // MLNET_TENSOR_H_
