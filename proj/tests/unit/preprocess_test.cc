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
#include "mlnet/preprocess.h"
#include "synthetic.h"

namespace mlnet {
namespace {

using Tokens = std::vector<std::string>;

TEST(SplitSentences, Rules) {
  EXPECT_EQ(split_sentences("A b. C d."), (Tokens{"A b.", "C d."}));
  EXPECT_EQ(split_sentences("No terminator"), (Tokens{"No terminator"}));
  EXPECT_EQ(split_sentences("x.\ny."), (Tokens{"x.", "y."}));
  EXPECT_EQ(split_sentences("Why? Because!  Yes"), (Tokens{"Why?", "Because!", "Yes"}));
  EXPECT_EQ(split_sentences("pH 7.4 buffer"), (Tokens{"pH 7.4 buffer"}));
  EXPECT_TRUE(split_sentences("  \n\n ").empty());
}

TEST(Tokenize, Rules) {
  EXPECT_EQ(tokenize("Cancer cells proliferate."), (Tokens{"cancer", "cells", "proliferate", "."}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("p53-mediated"), (Tokens{"p53-mediated"}));
  EXPECT_EQ(tokenize("(IL-6),"), (Tokens{"(", "il-6", ")", ","}));
}

TEST(RemoveStopwords, Cases) {
  StopList the = {"the"};
  EXPECT_EQ(remove_stopwords({"the", "cell"}, the), (Tokens{"cell"}));
  EXPECT_TRUE(remove_stopwords({}, the).empty());
  EXPECT_EQ(remove_stopwords({"the", "cell"}, {}), (Tokens{"the", "cell"}));
}

TEST(RemoveStopwords, DefaultListKeepsPunctuation) {
  const auto& list = default_stopwords();
  EXPECT_TRUE(list.count("the"));
  EXPECT_FALSE(list.count("cancer"));
  EXPECT_EQ(remove_stopwords({"the", "cell", "."}, list), (Tokens{"cell", "."}));
}

TEST(TokenizeDocument, DropsSentencesEmptiedByStopwords) {
  Document d{"d", "The of. Tumor growth.", {}};
  auto t = tokenize_document(d, default_stopwords());
  ASSERT_EQ(t.sentences.size(), 2u);  // "." survives in the first sentence
  EXPECT_EQ(t.sentences[0], (Tokens{"."}));
  EXPECT_EQ(t.sentences[1], (Tokens{"tumor", "growth", "."}));
  EXPECT_TRUE(tokenize_document(Document{"e", "the of and", {}}, default_stopwords())
                  .sentences.empty());
}

TEST(Embeddings, ParsesWithAndWithoutHeader) {
  auto plain = parse_embeddings("a 1 0\nb 0 1\n", "e");
  EXPECT_EQ(plain.dim(), 2);
  EXPECT_EQ(plain.size(), 2u);
  auto header = parse_embeddings("2 2\na 1 0\nb 0 1\n", "e");
  EXPECT_EQ(header.size(), 2u);
  EXPECT_EQ(plain.digest(), header.digest());
  EXPECT_EQ(plain.lookup("b"), Eigen::Vector2d(0, 1));
  EXPECT_EQ(plain.lookup("zz"), Eigen::Vector2d::Zero());
}

TEST(Embeddings, RejectsRaggedOrNonNumericRows) {
  EXPECT_THROW(parse_embeddings("a 1 0\nb 0 1 2\n", "e"), ParseError);
  EXPECT_THROW(parse_embeddings("a 1 0\nb 0 x\n", "e"), ParseError);
  try {
    parse_embeddings("a 1 0\nb 1 0\nc 1\n", "vec.txt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

EmbeddingTable two_d() { return parse_embeddings("v1 1 2\nv2 3 4\n", "e"); }

TEST(EmbedDocument, ConstructionAndMasks) {
  TokenizedDocument doc{"d", {{"v1", "v2"}}};
  EncoderInput in = embed_document(doc, two_d(), 2, 4);
  ASSERT_EQ(in.s_max(), 2);
  ASSERT_EQ(in.t_max(), 4);
  ASSERT_EQ(in.dim(), 2);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(2, 4);
  want << 1, 3, 0, 0, 2, 4, 0, 0;
  EXPECT_EQ(in.sentences[0], want);
  EXPECT_EQ(in.token_mask[0], (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(in.sentence_mask, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(in.sentences[1], Eigen::MatrixXd::Zero(2, 4));
}

TEST(EmbedDocument, OovStaysUnmasked) {
  TokenizedDocument doc{"d", {{"v1", "nope"}}};
  EncoderInput in = embed_document(doc, two_d(), 1, 3);
  EXPECT_EQ(in.token_mask[0], (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_EQ(in.sentences[0].col(1), Eigen::Vector2d::Zero());
}

TEST(EmbedDocument, TruncatesSentencesAndTokens) {
  TokenizedDocument doc{"d", {{"v1"}, {"v2", "v1", "v2"}, {"v1"}}};
  EncoderInput in = embed_document(doc, two_d(), 2, 2);
  EXPECT_EQ(in.sentence_count(), 2);
  EXPECT_EQ(in.token_mask[1], (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(in.sentences[1].col(0), Eigen::Vector2d(3, 4));
}

TEST(EmbedDocument, EmptyDocumentIsDegenerate) {
  EXPECT_THROW(embed_document(TokenizedDocument{"d", {}}, two_d(), 2, 2), DegenerateInputError);
}

TEST(EmbedDocument, ShapeAndMaskInvariantsOnSyntheticText) {
  testing::SyntheticOptions opts;
  opts.num_docs = 40;
  auto corpus = testing::make_synthetic_corpus(opts);
  for (int s_max : {1, 3, 9}) {
    for (int t_max : {1, 4, 12}) {
      PreprocessConfig cfg{s_max, t_max, default_stopwords()};
      for (const auto& d : corpus.docs) {
        auto tok = tokenize_document(d, cfg.stopwords);
        EncoderInput in = prepare_input(d, corpus.embeddings, cfg);
        ASSERT_EQ(in.s_max(), s_max);
        ASSERT_EQ(in.t_max(), t_max);
        ASSERT_EQ(in.dim(), opts.dim);
        for (int s = 0; s < in.sentence_count(); ++s) {
          int sum = 0;
          for (auto m : in.token_mask[static_cast<std::size_t>(s)]) sum += m;
          EXPECT_EQ(sum, std::min<int>(t_max, static_cast<int>(tok.sentences[static_cast<std::size_t>(s)].size())));
        }
        EncoderInput again = prepare_input(d, corpus.embeddings, cfg);
        for (int s = 0; s < s_max; ++s) {
          EXPECT_EQ(again.sentences[static_cast<std::size_t>(s)], in.sentences[static_cast<std::size_t>(s)]);
        }
      }
    }
  }
}

}  // namespace
}  // namespace mlnet
