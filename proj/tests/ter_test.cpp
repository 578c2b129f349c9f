#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "transeval/ter.hpp"

using namespace transeval;

namespace {

TokenSequence seq(std::vector<std::string> w) { return {std::move(w), {}}; }

std::vector<std::string> random_words(std::mt19937& rng, int max_len, int symbols) {
  std::uniform_int_distribution<int> len(0, max_len), sym(0, symbols - 1);
  std::vector<std::string> w;
  for (int k = len(rng); k > 0; --k) w.push_back(std::string(1, char('a' + sym(rng))));
  return w;
}

}  // namespace

TEST(Ter, IdentityIsZero) {
  const auto r = ter(seq({"a", "b", "c"}), seq({"a", "b", "c"}));
  EXPECT_EQ(r.edits, 0);
  EXPECT_EQ(r.score, 0.0);
}

TEST(Ter, SingleSubstitution) {
  const auto r = ter(seq({"a", "b", "x", "d"}), seq({"a", "b", "c", "d"}));
  EXPECT_EQ(r.edits, 1);
  EXPECT_EQ(r.shifts, 0);
  EXPECT_DOUBLE_EQ(r.score, 0.25);
}

TEST(Ter, SingleBlockShift) {
  const auto r = ter(seq({"c", "d", "a", "b"}), seq({"a", "b", "c", "d"}));
  EXPECT_EQ(r.shifts, 1);
  EXPECT_EQ(r.edits, 1);
  EXPECT_DOUBLE_EQ(r.score, 0.25);
  EXPECT_EQ(oracle::min_edits_with_shifts(std::vector<std::string>{"c", "d", "a", "b"},
                                          std::vector<std::string>{"a", "b", "c", "d"}),
            1);
}

TEST(Ter, EmptyReferenceIsUndefined) {
  EXPECT_THROW(ter(seq({"a"}), seq({})), DegenerateInputError);
}

TEST(Ter, EmptyHypothesisCountsDeletions) {
  const auto r = ter(seq({}), seq({"a", "b"}));
  EXPECT_EQ(r.edits, 2);
  EXPECT_DOUBLE_EQ(r.score, 1.0);
}

TEST(Ter, NeverAboveLevenshteinNeverBelowOptimum) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 3000; ++trial) {
    auto h = random_words(rng, 7, 3);
    auto r = random_words(rng, 7, 3);
    if (r.empty()) continue;
    const auto rep = ter(seq(h), seq(r));
    EXPECT_LE(rep.edits, oracle::lev(h, r));
    EXPECT_GE(rep.edits, oracle::min_edits_with_shifts(h, r));
    EXPECT_EQ(rep.edits == 0, h == r);
  }
}

TEST(Ter, CorpusPoolsEditsOverReferenceWords) {
  std::vector<TokenSequence> hyps{seq({"a", "b", "x", "d"}), seq({"c", "d", "a", "b"})};
  std::vector<TokenSequence> refs{seq({"a", "b", "c", "d"}), seq({"a", "b", "c", "d"})};
  const auto r = corpus_ter(hyps, refs);
  EXPECT_EQ(r.edits, 2);
  EXPECT_EQ(r.ref_len, 8);
  EXPECT_DOUBLE_EQ(r.score, 0.25);
}

TEST(Ter, ShiftHelperMovesBlocks) {
  const ter_detail::Words w{"a", "b", "c", "d", "e"};
  EXPECT_EQ(ter_detail::perform_shift(w, 3, 2, 0), (ter_detail::Words{"d", "e", "a", "b", "c"}));
  EXPECT_EQ(ter_detail::perform_shift(w, 0, 2, 5), (ter_detail::Words{"c", "d", "e", "a", "b"}));
}
