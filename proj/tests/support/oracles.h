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

#ifndef MLNET_TESTS_SUPPORT_ORACLES_H_
#define MLNET_TESTS_SUPPORT_ORACLES_H_

// Straight-line reference implementations used as test oracles. None of
// them share code with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlnet/random.h"

namespace mlnet::oracle {

// log(1 + sum over irrelevant v, relevant u of exp(f_v - f_u)), as a plain
// double loop.
inline double lsep(const Eigen::VectorXd& f, const std::vector<std::size_t>& gold) {
  std::vector<bool> relevant(static_cast<std::size_t>(f.size()), false);
  for (auto g : gold) relevant[g] = true;
  double sum = 0.0;
  for (Eigen::Index v = 0; v < f.size(); ++v) {
    if (relevant[static_cast<std::size_t>(v)]) continue;
    for (Eigen::Index u = 0; u < f.size(); ++u) {
      if (!relevant[static_cast<std::size_t>(u)]) continue;
      sum += std::exp(f(v) - f(u));
    }
  }
  return std::log1p(sum);
}

using Parents = std::map<std::string, std::string>;

inline std::vector<std::string> walk_up(const Parents& parents, const std::string& label) {
  std::vector<std::string> out;
  std::string cur = label;
  while (true) {
    auto it = parents.find(cur);
    if (it == parents.end()) break;
    out.push_back(it->second);
    cur = it->second;
  }
  return out;
}

inline std::set<std::string> closure(const Parents& parents, const std::set<std::string>& labels) {
  std::set<std::string> out = labels;
  for (const auto& l : labels) {
    for (const auto& a : walk_up(parents, l)) out.insert(a);
  }
  return out;
}

inline bool related(const Parents& parents, const std::string& x, const std::string& y) {
  if (x == y) return true;
  auto ux = walk_up(parents, x);
  auto uy = walk_up(parents, y);
  return std::find(ux.begin(), ux.end(), y) != ux.end() ||
         std::find(uy.begin(), uy.end(), x) != uy.end();
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Example-based metrics with the empty-set conventions. `parents` null means
// exact matching.
inline Prf example_metrics(const std::vector<std::set<std::string>>& gold,
                           const std::vector<std::set<std::string>>& pred,
                           const Parents* parents) {
  double p_sum = 0.0;
  double r_sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    const auto& y = pred[i];
    std::size_t tp_p = 0;
    for (const auto& a : y) {
      bool hit = false;
      for (const auto& b : g) {
        if (parents ? related(*parents, a, b) : a == b) hit = true;
      }
      tp_p += hit ? 1 : 0;
    }
    std::size_t tp_r = 0;
    for (const auto& b : g) {
      bool hit = false;
      for (const auto& a : y) {
        if (parents ? related(*parents, a, b) : a == b) hit = true;
      }
      tp_r += hit ? 1 : 0;
    }
    double p = 0.0;
    double r = 0.0;
    if (y.empty() && g.empty()) {
      p = 1.0;
      r = 1.0;
    } else {
      p = y.empty() ? 0.0 : static_cast<double>(tp_p) / static_cast<double>(y.size());
      r = g.empty() ? 0.0 : static_cast<double>(tp_r) / static_cast<double>(g.size());
    }
    p_sum += p;
    r_sum += r;
  }
  Prf out;
  const double n = static_cast<double>(gold.size());
  out.precision = p_sum / n;
  out.recall = r_sum / n;
  out.f1 = out.precision + out.recall == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

// Every threshold that can change a strict `>` decode: midpoints between
// adjacent distinct scores and one value beyond each end.
inline std::vector<double> threshold_grid(const std::vector<Eigen::VectorXd>& scores) {
  std::vector<double> all;
  for (const auto& s : scores) all.insert(all.end(), s.data(), s.data() + s.size());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> grid;
  grid.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i) grid.push_back(0.5 * (all[i] + all[i + 1]));
  grid.push_back(all.back() + 1.0);
  return grid;
}

inline std::vector<std::set<std::string>> decode_all(const std::vector<Eigen::VectorXd>& scores,
                                                     const std::vector<std::string>& labels,
                                                     double t) {
  std::vector<std::set<std::string>> out;
  for (const auto& s : scores) {
    std::set<std::string> chosen;
    for (Eigen::Index v = 0; v < s.size(); ++v) {
      if (s(v) > t) chosen.insert(labels[static_cast<std::size_t>(v)]);
    }
    out.push_back(chosen);
  }
  return out;
}

// Random forest over `n` nodes named n0..n{n-1}: each node after the first
// picks an earlier parent with probability `p_edge`.
inline Parents random_forest(Rng& rng, std::size_t n, double p_edge) {
  Parents parents;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t i = 1; i < n; ++i) {
    if (rng.uniform() < p_edge) parents[names[order[i]]] = names[order[rng.below(i)]];
  }
  return parents;
}

inline std::set<std::string> random_subset(Rng& rng, std::size_t n, double p) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < p) out.insert("n" + std::to_string(i));
  }
  return out;
}

}  // namespace mlnet::oracle

#endif  // MLNET_TESTS_SUPPORT_ORACLES_H_
