#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "transeval/corpus.hpp"

using namespace transeval;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("transeval_corpus_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return path_ / name;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string numbered_lines(const std::string& prefix, int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) s += prefix + " sentence " + std::to_string(i) + "\n";
  return s;
}

BitextPair pair_of_lengths(std::size_t s, std::size_t t) {
  std::string a, b;
  for (std::size_t i = 0; i < s; ++i) a += "w ";
  for (std::size_t i = 0; i < t; ++i) b += "v ";
  return BitextPair::from_text(a, b);
}

}  // namespace

TEST(LoadSuite, BindsLineIAcrossRoles) {
  TempDir dir;
  dir.file("x.txt", numbered_lines("en", 500));
  dir.file("ys.txt", numbered_lines("de", 500));
  dir.file("xss.txt", numbered_lines("en2", 500));
  const auto manifest = dir.file("m.json", R"({"source_language": "en", "target_language": "de",
    "direct": {"X": "x.txt", "Ystar": "ys.txt", "Xdoublestar": "xss.txt"}})");
  const auto suite = load_suite(manifest);
  EXPECT_EQ(suite.partition_size(Partition::kDirect), 500u);
  EXPECT_EQ(suite.partition_size(Partition::kReverse), 0u);
  const auto& item = suite.items[41];
  EXPECT_EQ(item.item_id, "direct:42");
  EXPECT_EQ(item.find(Role::kX)->text, "en sentence 42");
  EXPECT_EQ(item.find(Role::kYstar)->text, "de sentence 42");
  EXPECT_EQ(item.find(Role::kYstar)->translation_depth, 1);
  EXPECT_EQ(item.find(Role::kYstar)->language, "de");
  EXPECT_EQ(item.find(Role::kYstar)->origin_language, "en");
  EXPECT_EQ(item.find(Role::kXdoublestar)->translation_depth, 2);
  EXPECT_EQ(item.find(Role::kX)->translation_depth, 0);
}

TEST(LoadSuite, ReversePartitionOriginIsTarget) {
  TempDir dir;
  dir.file("xs.txt", "a\nb\n");
  dir.file("y.txt", "c\nd\n");
  const auto suite = load_suite(dir.file("m.json", R"({"target_language": "ru", "reverse": {"Xstar": "xs.txt", "Y": "y.txt"}})"));
  ASSERT_EQ(suite.partition_size(Partition::kReverse), 2u);
  EXPECT_EQ(suite.items[0].find(Role::kY)->origin_language, "ru");
  EXPECT_EQ(suite.items[0].find(Role::kY)->translation_depth, 0);
  EXPECT_EQ(suite.items[0].find(Role::kXstar)->translation_depth, 1);
}

TEST(LoadSuite, EmptyManifestIsEmptySuite) {
  TempDir dir;
  const auto suite = load_suite(dir.file("m.json", "{}"));
  EXPECT_TRUE(suite.items.empty());
}

TEST(LoadSuite, UnequalLineCountsNameBothFiles) {
  TempDir dir;
  dir.file("x.txt", numbered_lines("en", 500));
  dir.file("ys.txt", numbered_lines("de", 499));
  const auto m = dir.file("m.json", R"({"direct": {"X": "x.txt", "Ystar": "ys.txt"}})");
  try {
    load_suite(m);
    FAIL() << "expected AlignmentError";
  } catch (const AlignmentError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x.txt"), std::string::npos);
    EXPECT_NE(msg.find("ys.txt"), std::string::npos);
    EXPECT_NE(msg.find("500"), std::string::npos);
    EXPECT_NE(msg.find("499"), std::string::npos);
  }
}

TEST(LoadSuite, MissingFileNamesRole) {
  TempDir dir;
  dir.file("x.txt", "a\n");
  const auto m = dir.file("m.json", R"({"direct": {"X": "x.txt", "Ystar": "nope.txt"}})");
  try {
    load_suite(m);
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("Ystar"), std::string::npos);
  }
}

TEST(LoadSuite, EmptyLineReportsLineNumber) {
  TempDir dir;
  dir.file("x.txt", "a\n  \nc\n");
  dir.file("ys.txt", "a\nb\nc\n");
  const auto m = dir.file("m.json", R"({"direct": {"X": "x.txt", "Ystar": "ys.txt"}})");
  try {
    load_suite(m);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadSuite, RequiredRolesAndPartitionMembership) {
  TempDir dir;
  dir.file("x.txt", "a\n");
  EXPECT_THROW(load_suite(dir.file("m1.json", R"({"direct": {"X": "x.txt"}})")), ValidationError);
  EXPECT_THROW(load_suite(dir.file("m2.json", R"({"direct": {"X": "x.txt", "Ystar": "x.txt", "Y": "x.txt"}})")),
               ValidationError);
  EXPECT_THROW(load_suite(dir.file("m3.json", R"({"sideways": {}})")), ValidationError);
}

TEST(Repartition, IdempotentAndOrderPreserving) {
  TempDir dir;
  dir.file("x.txt", "1\n2\n3\n");
  dir.file("ys.txt", "1\n2\n3\n");
  dir.file("xs.txt", "4\n5\n");
  dir.file("y.txt", "4\n5\n");
  const auto suite = load_suite(dir.file("m.json",
      R"({"reverse": {"Xstar": "xs.txt", "Y": "y.txt"}, "direct": {"X": "x.txt", "Ystar": "ys.txt"}})"));
  TestSuite shuffled = suite;
  std::swap(shuffled.items[0], shuffled.items[4]);  // a reverse item first
  const auto once = repartition(shuffled);
  const auto twice = repartition(once);
  ASSERT_EQ(once.items.size(), twice.items.size());
  for (std::size_t i = 0; i < once.items.size(); ++i) EXPECT_EQ(once.items[i].item_id, twice.items[i].item_id);
  EXPECT_EQ(suite.items.front().item_id, "direct:1");
  EXPECT_EQ(suite.items.back().item_id, "reverse:2");
}

TEST(FilterBitext, SpecExamples) {
  std::vector<BitextPair> pairs{pair_of_lengths(251, 200), pair_of_lengths(30, 10), pair_of_lengths(10, 10)};
  const auto res = filter_bitext(pairs);
  EXPECT_EQ(res.report.removed_max_len, 1);
  EXPECT_EQ(res.report.removed_ratio, 1);
  EXPECT_EQ(res.report.kept, 1);
  ASSERT_EQ(res.kept.size(), 1u);
  EXPECT_EQ(res.kept[0].source_len, 10u);
}

TEST(FilterBitext, BoundariesAreInclusive) {
  std::vector<BitextPair> pairs{pair_of_lengths(250, 250), pair_of_lengths(3, 2), pair_of_lengths(2, 3),
                                pair_of_lengths(7, 4)};
  const auto res = filter_bitext(pairs);
  EXPECT_EQ(res.report.kept, 3);  // 250/250, ratio 1.5 both ways
  EXPECT_EQ(res.report.removed_ratio, 1);
}

TEST(FilterBitext, CountsSumAndOrderIsPreserved) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> len(0, 300);
  std::vector<BitextPair> pairs;
  for (int i = 0; i < 400; ++i) {
    auto p = pair_of_lengths(len(rng), len(rng));
    p.source.id = std::to_string(i);
    pairs.push_back(p);
  }
  const auto res = filter_bitext(pairs);
  EXPECT_EQ(res.report.removed(), res.report.input - res.report.kept);
  for (std::size_t i = 1; i < res.kept.size(); ++i)
    EXPECT_LT(std::stoi(res.kept[i - 1].source.id), std::stoi(res.kept[i].source.id));

  // Sharded filtering merges to the same report.
  FilterReport merged;
  for (std::size_t b = 0; b < pairs.size(); b += 37)
    merged += filter_bitext(std::span(pairs).subspan(b, std::min<std::size_t>(37, pairs.size() - b))).report;
  EXPECT_EQ(merged, res.report);
}

TEST(FilterBitext, RejectsBadOptions) {
  std::vector<BitextPair> none;
  EXPECT_THROW(filter_bitext(none, {0, 1.5, {}}), ValidationError);
  EXPECT_THROW(filter_bitext(none, {10, 0.0, {}}), ValidationError);
}

TEST(FilterBitext, LanguagePredicate) {
  std::vector<BitextPair> pairs{BitextPair::from_text("the house is red", "дом красный очень", "en", "ru"),
                                BitextPair::from_text("the house is red", "the house is red", "en", "ru")};
  FilterOptions opt;
  opt.lang_predicate = script_language_predicate();
  const auto res = filter_bitext(pairs, opt);
  EXPECT_EQ(res.report.kept, 1);
  EXPECT_EQ(res.report.removed_language, 1);
  EXPECT_DOUBLE_EQ(script_fraction("abc где", Script::kLatin), 0.5);
}

TEST(Disjointness, SpecExamples) {
  std::vector<std::string> a;
  for (int i = 0; i < 100; ++i) a.push_back("line " + std::to_string(i));
  EXPECT_DOUBLE_EQ(disjointness_report(a, a).fraction(), 1.0);
  std::vector<std::string> b;
  for (int i = 0; i < 100; ++i) b.push_back("other " + std::to_string(i));
  EXPECT_DOUBLE_EQ(disjointness_report(a, b).fraction(), 0.0);
  EXPECT_DOUBLE_EQ(disjointness_report(a, std::vector<std::string>{}).fraction(), 0.0);
  EXPECT_DOUBLE_EQ(disjointness_report(std::vector<std::string>{}, a).fraction(), 0.0);
}

TEST(Disjointness, MatchesBruteForceIntersection) {
  std::vector<std::string> lm, ex;
  for (int i = 0; i < 10; ++i) lm.push_back("sentence number " + std::to_string(i));
  ex = {"unrelated", "sentence number 3", "  sentence   number 7 ", "Sentence number 5", "sentence number 9"};
  // Brute force: normalized string equality against every excluded line.
  int hits = 0;
  for (const auto& l : lm)
    for (const auto& e : ex)
      if (text::squeeze(l) == text::squeeze(e)) {
        ++hits;
        break;
      }
  EXPECT_EQ(hits, 3);
  const auto r = disjointness_report(lm, ex);
  EXPECT_EQ(r.overlapping, 3);
  EXPECT_DOUBLE_EQ(r.fraction(), 0.3);
}

TEST(Disjointness, ShardMergeIsOrderIndependent) {
  std::vector<std::string> lm, ex;
  for (int i = 0; i < 90; ++i) lm.push_back("l" + std::to_string(i % 30));
  for (int i = 0; i < 30; i += 4) ex.push_back("l" + std::to_string(i));
  const LineIndex idx(ex);
  OverlapReport fwd, rev;
  for (std::size_t b = 0; b < lm.size(); b += 20)
    fwd += disjointness_report(std::span(lm).subspan(b, std::min<std::size_t>(20, lm.size() - b)), idx);
  for (std::size_t b = lm.size(); b > 0; b = b >= 20 ? b - 20 : 0) {
    const std::size_t start = b >= 20 ? b - 20 : 0;
    rev += disjointness_report(std::span(lm).subspan(start, b - start), idx);
    if (start == 0) break;
  }
  EXPECT_EQ(fwd, rev);
  EXPECT_EQ(fwd, disjointness_report(lm, ex));
}
