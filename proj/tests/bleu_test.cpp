#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "transeval/bleu.hpp"
#include "transeval/metrics.hpp"
#include "transeval/text.hpp"

using namespace transeval;

namespace {

TokenSequence seq(std::vector<std::string> w) { return {std::move(w), {}}; }

}  // namespace

TEST(BleuStats, Identity) {
  const auto s = bleu_stats(seq({"the", "cat", "sat"}), seq({"the", "cat", "sat"}));
  EXPECT_EQ(s.match, (std::array<std::int64_t, 4>{3, 2, 1, 0}));
  EXPECT_EQ(s.total, (std::array<std::int64_t, 4>{3, 2, 1, 0}));
}

TEST(BleuStats, ClippedMatches) {
  const auto s = bleu_stats(seq({"the", "cat", "the", "cat"}), seq({"the", "cat", "sat", "down"}));
  EXPECT_EQ(s.match, (std::array<std::int64_t, 4>{2, 1, 0, 0}));
  EXPECT_EQ(s.total, (std::array<std::int64_t, 4>{4, 3, 2, 1}));
}

TEST(BleuStats, EmptyHypothesis) {
  const auto s = bleu_stats(seq({}), seq({"a"}));
  EXPECT_EQ(s.match, (std::array<std::int64_t, 4>{}));
  EXPECT_EQ(s.total, (std::array<std::int64_t, 4>{}));
  EXPECT_EQ(s.hyp_len, 0);
  EXPECT_EQ(s.ref_len, 1);
}

TEST(BleuScore, WorkedExampleWithExpSmoothing) {
  const auto r = bleu_score(bleu_stats(seq({"the", "cat", "the", "cat"}), seq({"the", "cat", "sat", "down"})));
  EXPECT_DOUBLE_EQ(r.precisions[0], 0.5);
  EXPECT_DOUBLE_EQ(r.precisions[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precisions[2], 1.0 / (2 * 2));
  EXPECT_DOUBLE_EQ(r.precisions[3], 1.0 / (4 * 1));
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
  // Pinned by the hand-count oracle and by sacrebleu (31.947155212313625).
  EXPECT_NEAR(r.score, 31.947155212313625, 1e-9);
  EXPECT_EQ(fixed(r.score, 1), "31.9");
}

TEST(BleuScore, IdentityIsExactly100) {
  const auto r = sentence_bleu(seq({"a", "b", "c", "d", "e"}), seq({"a", "b", "c", "d", "e"}));
  EXPECT_EQ(r.score, 100.0);
  // Short identical sentences still score 100: unused orders are skipped.
  EXPECT_EQ(sentence_bleu(seq({"a", "b"}), seq({"a", "b"})).score, 100.0);
}

TEST(BleuScore, EmptyHypothesisScoresZero) {
  EXPECT_EQ(sentence_bleu(seq({}), seq({"x", "y"})).score, 0.0);
}

TEST(BleuScore, DisjointVocabularyFollowsSmoothingChain) {
  for (int n = 4; n <= 9; ++n) {
    std::vector<std::string> h, r;
    for (int i = 0; i < n; ++i) {
      h.push_back("h" + std::to_string(i));
      r.push_back("r" + std::to_string(i));
    }
    const auto rep = sentence_bleu(seq(h), seq(r));
    double k = 1;
    double logsum = 0;
    for (int o = 0; o < 4; ++o) {
      k *= 2;
      const double p = 1.0 / (k * (n - o));
      EXPECT_DOUBLE_EQ(rep.precisions[o], p);
      logsum += std::log(p);
    }
    EXPECT_NEAR(rep.score, 100.0 * std::exp(logsum / 4), 1e-12);
  }
}

TEST(BleuScore, BrevityPenalty) {
  BleuStats s;
  s.match = {5, 4, 3, 2};
  s.total = {5, 4, 3, 2};
  s.hyp_len = 5;
  s.ref_len = 10;
  const auto r = bleu_score(s);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, std::exp(1.0 - 2.0));
  EXPECT_DOUBLE_EQ(r.score, 100.0 * std::exp(-1.0));
}

TEST(BleuStats, AdditionIsAssociativeAndOrderFree) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> word(0, 4), len(0, 9);
  std::vector<BleuStats> segs;
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> h, r;
    for (int k = len(rng); k > 0; --k) h.push_back(std::string(1, char('a' + word(rng))));
    for (int k = len(rng); k > 0; --k) r.push_back(std::string(1, char('a' + word(rng))));
    const auto s = bleu_stats(seq(h), seq(r));
    for (int k = 0; k < 4; ++k) {
      ASSERT_LE(s.match[k], s.total[k]);
      ASSERT_EQ(s.total[k], std::max<std::int64_t>(s.hyp_len - k, 0));
    }
    segs.push_back(s);
  }
  const BleuStats forward = sum_stats(segs);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(segs.begin(), segs.end(), rng);
    BleuStats left, right;
    for (std::size_t i = 0; i < segs.size() / 2; ++i) left += segs[i];
    for (std::size_t i = segs.size() / 2; i < segs.size(); ++i) right += segs[i];
    EXPECT_EQ(left + right, forward);
    EXPECT_EQ(bleu_score(right + left).score, bleu_score(forward).score);
  }
  const double score = bleu_score(forward).score;
  EXPECT_GE(score, 0.0);
  EXPECT_LE(score, 100.0);
}

TEST(BleuScore, MatchesHandCountOracleOnRandomCorpora) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> word(0, 3), len(0, 8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenSequence> hyps, refs;
    std::vector<oracle::Words> oh, orf;
    for (int i = 0; i < 5; ++i) {
      oracle::Words h, r;
      for (int k = len(rng); k > 0; --k) h.push_back(std::string(1, char('a' + word(rng))));
      for (int k = len(rng) + 1; k > 0; --k) r.push_back(std::string(1, char('a' + word(rng))));
      hyps.push_back(seq(h));
      refs.push_back(seq(r));
      oh.push_back(h);
      orf.push_back(r);
    }
    EXPECT_NEAR(corpus_bleu(hyps, refs).score, oracle::hand_bleu(oracle::hand_stats(oh, orf)), 1e-9);
  }
}

TEST(BleuScore, GoldenCorpusAgainstPinnedValues) {
  const std::string dir = std::string(TRANSEVAL_TEST_DATA) + "/golden_bleu/";
  const auto hyp_lines = text::read_lines(dir + "hyp.txt");
  const auto ref_lines = text::read_lines(dir + "ref.txt");
  ASSERT_EQ(hyp_lines.size(), 20u);
  ASSERT_EQ(ref_lines.size(), 20u);
  std::ifstream f(dir + "expected.json");
  const auto expected = nlohmann::json::parse(f);

  std::vector<TokenSequence> hyps, refs;
  for (const auto& l : hyp_lines) hyps.push_back(tok13a(l));
  for (const auto& l : ref_lines) refs.push_back(tok13a(l));
  const auto report = corpus_bleu(hyps, refs);
  EXPECT_NEAR(report.score, expected["corpus"]["score"].get<double>(), 0.01);
  EXPECT_EQ(report.hyp_len, expected["corpus"]["hyp_len"].get<int>());
  EXPECT_EQ(report.ref_len, expected["corpus"]["ref_len"].get<int>());
  for (int i = 0; i < 20; ++i)
    EXPECT_NEAR(sentence_bleu(hyps[i], refs[i]).score, expected["sentences"][i].get<double>(), 0.01) << "line " << i + 1;
  EXPECT_EQ(corpus_bleu(refs, refs).score, 100.0);
}

TEST(DeltaTable, ComputedFromUnroundedScores) {
  std::map<std::string, ForwardReverse> sys;
  sys["Facebook-FAIR"].fwd.score = 45.76;
  sys["Facebook-FAIR"].rev.score = 46.14;
  sys["online-Y"].fwd.score = 47.1;
  sys["online-Y"].rev.score = 30.3;
  const auto t = delta_table(sys);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].system, "online-Y");
  EXPECT_EQ(t.rows[1].system, "Facebook-FAIR");
  // Displays 45.8 / 46.1 / 0.4: the delta is not the difference of the rounded values.
  EXPECT_EQ(fixed(t.rows[1].fwd, 1), "45.8");
  EXPECT_EQ(fixed(t.rows[1].rev, 1), "46.1");
  EXPECT_EQ(fixed(t.rows[1].delta, 1), "0.4");
  EXPECT_EQ(fixed(t.rows[0].delta, 1), "-16.8");
}

TEST(DeltaTable, EqualScoresGiveZeroDelta) {
  std::map<std::string, ForwardReverse> sys;
  sys["only"].fwd.score = 30.0;
  sys["only"].rev.score = 30.0;
  const auto t = delta_table(sys);
  EXPECT_EQ(fixed(t.rows[0].delta, 1), "0.0");
  EXPECT_NE(render(t).find("only"), std::string::npos);
}
