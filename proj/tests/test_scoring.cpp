// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include <gtest/gtest.h>

#include "cpulab/scoring.hpp"
#include "test_support.hpp"

namespace cpulab {
namespace {

const std::vector<ScoreRequest> kRequests = {
    {0, "a red car is parked next to a tall tree", "a red car parked beside a tall tree"},
    {1, "the the the the the the", "a dog runs across the field"},
    {2, "two people are talking at a table in a cafe", "two people talk at a cafe table"},
};

std::string write_scorer(const testing::TempDir& dir, const std::string& body) {
  const auto path = dir / "scorer.py";
  std::ofstream(path) << "import json, sys\n" << body;
  return path.string();
}

TEST(Lexical, SelfSimilarityIsOne) {
  EXPECT_NEAR(lexical_similarity("The cat sat on the mat.", "the cat sat on the mat"), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(lexical_similarity("", "anything"), 0.0);
  EXPECT_DOUBLE_EQ(lexical_similarity("...", "anything"), 0.0);
}

TEST(Lexical, ParaphraseBeatsUnrelated) {
  const std::string ref = "a brown dog chases a ball across the green park";
  const double para = lexical_similarity("the brown dog is chasing a ball in the park", ref);
  const double unrelated = lexical_similarity("stock prices fell sharply on monday morning", ref);
  EXPECT_GT(para, unrelated);
  EXPECT_GE(para, 0.0);
  EXPECT_LE(para, 1.0);
}

TEST(Degenerate, Rules) {
  EXPECT_TRUE(is_degenerate(""));
  EXPECT_TRUE(is_degenerate("too short here"));
  EXPECT_TRUE(is_degenerate("yes yes yes yes yes no"));
  EXPECT_FALSE(is_degenerate("a perfectly ordinary sentence about cats"));
}

TEST(ScoreBatch, NoScorerUsesLexicalFallback) {
  const auto b = score_batch(kRequests);
  EXPECT_TRUE(b.fallback);
  EXPECT_EQ(b.scorer, kLexicalScorer);
  ASSERT_EQ(b.results.size(), 3u);
  EXPECT_TRUE(b.results[1].degenerate);
  EXPECT_FALSE(b.results[0].degenerate);
  EXPECT_GT(b.results[0].score, b.results[1].score);
}

TEST(ScoreBatch, ExternalScorerProtocol) {
  testing::TempDir dir("scorer");
  const auto script = write_scorer(dir,
                                   "for line in sys.stdin:\n"
                                   "    r = json.loads(line)\n"
                                   "    print('loading weights...')\n"
                                   "    print(json.dumps({'id': r['id'], 'score': 0.25 + 0.25 * r['id'], 'degenerate': r['id'] == 2}))\n");
  const auto b = score_batch(kRequests, std::vector<std::string>{"python3", script});
  EXPECT_FALSE(b.fallback) << b.fallback_reason;
  ASSERT_EQ(b.results.size(), 3u);
  EXPECT_DOUBLE_EQ(b.results[0].score, 0.25);
  EXPECT_DOUBLE_EQ(b.results[2].score, 0.75);
  EXPECT_TRUE(b.results[2].degenerate);
  // degenerate text is flagged even when the scorer says otherwise
  EXPECT_TRUE(b.results[1].degenerate);
  EXPECT_NE(b.scorer.find("scorer.py"), std::string::npos);
}

TEST(ScoreBatch, FailingScorerFallsBackAndSaysSo) {
  testing::TempDir dir("scorer");
  const auto crash = write_scorer(dir, "sys.stderr.write('boom')\nsys.exit(4)\n");
  const auto a = score_batch(kRequests, std::vector<std::string>{"python3", crash});
  EXPECT_TRUE(a.fallback);
  EXPECT_EQ(a.scorer, kLexicalScorer);
  EXPECT_FALSE(a.fallback_reason.empty());
  ASSERT_EQ(a.results.size(), 3u);

  const auto missing = score_batch(kRequests, std::vector<std::string>{(dir / "no-such-scorer").string()});
  EXPECT_TRUE(missing.fallback);

  const auto bad = write_scorer(dir, "for line in sys.stdin:\n    r = json.loads(line)\n    print(json.dumps({'id': r['id'], 'score': 3.0}))\n");
  EXPECT_TRUE(score_batch(kRequests, std::vector<std::string>{"python3", bad}).fallback);
}

std::vector<ScoreResult> scores(std::vector<double> s, std::vector<bool> d) {
  std::vector<ScoreResult> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({i, s[i], d[i]});
  return out;
}

TEST(OutlierRemoval, DropsUnionFromBoth) {
  const auto r = symmetric_outlier_removal(scores({0.8, 0.1, 0.7, 0.6}, {false, true, false, false}),
                                           scores({0.7, 0.6, 0.0, 0.5}, {false, false, true, false}));
  EXPECT_EQ(r.removed, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.a.scores, (std::vector<double>{0.8, 0.6}));
  EXPECT_EQ(r.b.scores, (std::vector<double>{0.7, 0.5}));
  EXPECT_NEAR(r.a.mean, 0.7, 1e-12);
  EXPECT_NEAR(r.b.mean, 0.6, 1e-12);
}

TEST(OutlierRemoval, NothingFlaggedKeepsAll) {
  const auto r = symmetric_outlier_removal(scores({0.5, 0.5}, {false, false}), scores({0.2, 0.4}, {false, false}));
  EXPECT_TRUE(r.removed.empty());
  EXPECT_EQ(r.b.scores.size(), 2u);
}

TEST(OutlierRemoval, LengthMismatch) {
  try {
    symmetric_outlier_removal(scores({0.5}, {false}), scores({0.2, 0.4}, {false, false}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::input);
  }
}

}  // namespace
}  // namespace cpulab
