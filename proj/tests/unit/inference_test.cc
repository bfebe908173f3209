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

#include <gtest/gtest.h>

#include "mlnet/errors.h"
#include "mlnet/fixtures.h"
#include "mlnet/inference.h"
#include "mlnet/random.h"
#include "oracles.h"
#include "synthetic.h"

namespace mlnet {
namespace {

using Idx = std::vector<std::size_t>;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(RankLabels, OrderAndTies) {
  EXPECT_EQ(rank_labels(vec({0.1, 0.9, 0.5})), (Idx{1, 2, 0}));
  EXPECT_EQ(rank_labels(vec({0.3, 0.3, 0.3})), (Idx{0, 1, 2}));
  EXPECT_EQ(rank_labels(vec({0.0, 0.0, 1.0})), (Idx{2, 0, 1}));
}

TEST(RankLabels, InvariantToShift) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd s(8);
    for (Eigen::Index i = 0; i < 8; ++i) s(i) = std::round(rng.uniform(0, 3) * 2) / 2;
    EXPECT_EQ(rank_labels(s), rank_labels((s.array() + 0.5).matrix()));
  }
}

TEST(DecodeTopK, Cases) {
  EXPECT_EQ(decode_topk(vec({0.1, 0.9, 0.5}), vec({0.1, 0.8, 0.1})).labels, (Idx{1, 2}));
  EXPECT_EQ(decode_count(vec({1.0 / 3, 1.0 / 3, 1.0 / 3})), 1);
  EXPECT_EQ(decode_topk(vec({0.1, 0.9, 0.5}), vec({1.0 / 3, 1.0 / 3, 1.0 / 3})).labels, (Idx{1}));
  EXPECT_EQ(decode_topk(vec({0.2, 0.1, 0.3}), vec({0.0, 0.0, 1.0})).labels, (Idx{0, 1, 2}));
  // K larger than L is capped.
  EXPECT_EQ(decode_topk(vec({0.2, 0.1}), vec({0.0, 0.0, 1.0})).labels, (Idx{0, 1}));
}

TEST(DecodeTopK, SizeEqualsArgmaxCount) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd s(6), p(4);
    for (Eigen::Index i = 0; i < 6; ++i) s(i) = rng.uniform(0, 1);
    for (Eigen::Index i = 0; i < 4; ++i) p(i) = rng.uniform(0, 1);
    p /= p.sum();
    auto d = decode_topk(s, p);
    EXPECT_EQ(static_cast<int>(d.labels.size()), decode_count(p));
    EXPECT_TRUE(std::is_sorted(d.labels.begin(), d.labels.end()));
  }
}

TEST(DecodeThreshold, StrictAndMonotone) {
  auto s = vec({0.1, 0.9, 0.5});
  EXPECT_EQ(decode_threshold(s, 0.4).labels, (Idx{1, 2}));
  EXPECT_TRUE(decode_threshold(s, 0.9).labels.empty());
  EXPECT_EQ(decode_threshold(s, -1.0).labels, (Idx{0, 1, 2}));
  EXPECT_TRUE(decode_threshold(vec({0.0, 0.0}), 0.0).labels.empty());
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(5);
    for (Eigen::Index i = 0; i < 5; ++i) x(i) = rng.uniform(0, 1);
    double t1 = rng.uniform(0, 1), t2 = rng.uniform(0, 1);
    if (t1 > t2) std::swap(t1, t2);
    auto a = decode_threshold(x, t1).labels;
    auto b = decode_threshold(x, t2).labels;
    EXPECT_TRUE(std::includes(a.begin(), a.end(), b.begin(), b.end()));
  }
}

TEST(ThresholdCandidates, MidpointsAndSentinels) {
  std::vector<ScoreVector> s = {vec({0.0, 1.0}), vec({1.0, 3.0})};
  EXPECT_EQ(threshold_candidates(s), (std::vector<double>{-1.0, 0.5, 2.0, 4.0}));
}

TEST(SearchThreshold, SingleExampleMidpoint) {
  LabelVocabulary v({"a", "b"});
  std::vector<ScoreVector> s = {vec({0.9, 0.1})};
  std::vector<LabelSet> g = {{"a"}};
  auto t = search_threshold(s, g, v);
  EXPECT_DOUBLE_EQ(t.value, 0.5);
  EXPECT_EQ(t.achieved_f1, 1.0);
  EXPECT_EQ(t.source_split, "validation");
}

TEST(SearchThreshold, AllGoldEmptyChoosesAboveMax) {
  LabelVocabulary v({"a", "b"});
  std::vector<ScoreVector> s = {vec({0.9, 0.1}), vec({0.3, 0.7})};
  std::vector<LabelSet> g = {{}, {}};
  auto t = search_threshold(s, g, v, nullptr, "train");
  EXPECT_DOUBLE_EQ(t.value, 1.9);
  EXPECT_EQ(t.achieved_f1, 1.0);
  EXPECT_EQ(t.source_split, "train");
}

TEST(SearchThreshold, OptimalOverExhaustiveGrid) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t L = 1 + rng.below(8);
    std::vector<std::string> names;
    for (std::size_t v = 0; v < L; ++v) names.push_back("l" + std::to_string(v));
    LabelVocabulary vocab(names);
    const std::size_t n = 1 + rng.below(200 / L);
    std::vector<ScoreVector> scores;
    std::vector<LabelSet> gold;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd s(static_cast<Eigen::Index>(L));
      for (Eigen::Index k = 0; k < s.size(); ++k) {
        s(k) = std::max(0.0, std::round(rng.uniform(-1, 3) * 4) / 4);
      }
      scores.push_back(s);
      LabelSet g;
      for (std::size_t v = 0; v < L; ++v) {
        if (rng.uniform() < 0.35) g.insert(names[v]);
      }
      gold.push_back(g);
    }
    auto t = search_threshold(scores, gold, vocab);
    double best = -1.0, best_t = 0.0;
    for (double c : oracle::threshold_grid(scores)) {
      double f = oracle::example_metrics(gold, oracle::decode_all(scores, names, c), nullptr).f1;
      if (f > best + 1e-12) {
        best = f;
        best_t = c;
      }
    }
    EXPECT_NEAR(t.achieved_f1, best, 1e-12);
    EXPECT_DOUBLE_EQ(t.value, best_t) << "smallest optimal threshold";
  }
}

TEST(SearchThreshold, HierarchicalMatchingUsesOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t L = 2 + rng.below(6);
    auto parents = oracle::random_forest(rng, L, 0.6);
    auto h = LabelHierarchy::from_parent_map(parents);
    std::vector<std::string> names;
    for (std::size_t v = 0; v < L; ++v) names.push_back("n" + std::to_string(v));
    LabelVocabulary vocab(names);
    std::vector<std::string> sorted = vocab.labels();
    std::vector<ScoreVector> scores;
    std::vector<LabelSet> gold;
    for (int i = 0; i < 6; ++i) {
      Eigen::VectorXd s(static_cast<Eigen::Index>(L));
      for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = rng.uniform(0, 1);
      scores.push_back(s);
      gold.push_back(oracle::random_subset(rng, L, 0.3));
    }
    auto t = search_threshold(scores, gold, vocab, &h);
    double best = -1.0;
    for (double c : oracle::threshold_grid(scores)) {
      best = std::max(best, oracle::example_metrics(gold, oracle::decode_all(scores, sorted, c), &parents).f1);
    }
    EXPECT_NEAR(t.achieved_f1, best, 1e-12);
  }
}

TEST(SearchThreshold, RejectsMismatchedInputs) {
  LabelVocabulary v({"a", "b"});
  std::vector<ScoreVector> s = {vec({0.9, 0.1})};
  std::vector<LabelSet> none;
  EXPECT_THROW(search_threshold(s, none, v), DataError);
  std::vector<ScoreVector> empty;
  EXPECT_THROW(search_threshold(empty, none, v), DataError);
  std::vector<ScoreVector> wide = {vec({0.9, 0.1, 0.2})};
  std::vector<LabelSet> g = {{"a"}};
  EXPECT_THROW(search_threshold(wide, g, v), DimensionError);
}

TEST(ThresholdJson, RoundTrip) {
  GlobalThreshold t{0.125, "train", 0.75};
  auto back = threshold_from_json(threshold_to_json(t), "mem");
  EXPECT_EQ(back.value, t.value);
  EXPECT_EQ(back.source_split, "train");
  EXPECT_EQ(back.achieved_f1, 0.75);
  EXPECT_THROW(threshold_from_json("{\"value\": \"x\"}", "mem"), ParseError);
  EXPECT_THROW(threshold_from_json("not json", "mem"), ParseError);
}

struct PredictFixture : ::testing::Test {
  void SetUp() override {
    testing::SyntheticOptions opts;
    opts.num_docs = 12;
    corpus = testing::make_synthetic_corpus(opts);
    bundle = init_model(testing::synthetic_model_config(opts), build_vocabulary(corpus.docs), 5);
  }
  testing::SyntheticCorpus corpus;
  ModelBundle bundle;
};

TEST_F(PredictFixture, TopKNeedsTrainedCountHead) {
  EXPECT_THROW(predict(corpus.docs[0], bundle, corpus.embeddings, DecodeMode::kTopK), UsageError);
  EXPECT_THROW(predict(corpus.docs[0], bundle, corpus.embeddings, DecodeMode::kThreshold),
               UsageError);
}

TEST_F(PredictFixture, DeterministicAndBoundedByN) {
  bundle.count_head_trained = true;
  GlobalThreshold t{0.0, "validation", 0.0};
  for (const auto& d : corpus.docs) {
    auto a = predict(d, bundle, corpus.embeddings, DecodeMode::kTopK);
    auto b = predict(d, bundle, corpus.embeddings, DecodeMode::kTopK);
    EXPECT_EQ(a.labels.labels, b.labels.labels);
    EXPECT_EQ(a.scores, b.scores);
    EXPECT_LE(a.labels.labels.size(), static_cast<std::size_t>(bundle.config.max_labels));
    EXPECT_GE(a.labels.labels.size(), 1u);
    auto c = predict(d, bundle, corpus.embeddings, DecodeMode::kThreshold, &t);
    EXPECT_EQ(c.labels.labels, decode_threshold(a.scores, 0.0).labels);
    EXPECT_EQ(c.labels.mode, DecodeMode::kThreshold);
  }
}

TEST_F(PredictFixture, ModesCanDiffer) {
  bundle.count_head_trained = true;
  GlobalThreshold low{-1.0, "validation", 0.0};
  auto topk = predict(corpus.docs[0], bundle, corpus.embeddings, DecodeMode::kTopK);
  auto all = predict(corpus.docs[0], bundle, corpus.embeddings, DecodeMode::kThreshold, &low);
  EXPECT_EQ(all.labels.labels.size(), bundle.vocab.size());
  EXPECT_LT(topk.labels.labels.size(), all.labels.labels.size());
}

TEST_F(PredictFixture, JsonLine) {
  bundle.count_head_trained = true;
  auto p = predict(corpus.docs[0], bundle, corpus.embeddings, DecodeMode::kTopK);
  std::string line = prediction_to_json(p, bundle.vocab);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("\"id\":\"doc0\""), std::string::npos);
  EXPECT_NE(line.find("\"mode\":\"topk\""), std::string::npos);
}

}  // namespace
}  // namespace mlnet
