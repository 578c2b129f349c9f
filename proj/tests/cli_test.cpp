#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "transeval/cli.hpp"

using namespace transeval;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::dispatch(args, {in, out, err});
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("transeval_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const std::string& name, const std::string& content) {
    std::ofstream(dir_ / name, std::ios::binary) << content;
    return (dir_ / name).string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, BleuIdentityIsHundred) {
  const auto r = file("r.txt", "the cat sat on the mat .\nhello , world !\n");
  const auto res = run({"bleu", "--hyp", r, "--ref", r});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto j = res.json();
  EXPECT_EQ(j["result"]["score"], 100.0);
  EXPECT_EQ(j["config"]["tokenizer"], "13a");
  EXPECT_EQ(j["tool"]["version"], kVersion);
}

TEST_F(CliTest, MissingFileExitsTwoAndNamesPath) {
  const auto r = file("r.txt", "a\n");
  const auto missing = path("missing.txt");
  const auto res = run({"bleu", "--hyp", missing, "--ref", r});
  EXPECT_EQ(res.code, 2);
  const auto err = nlohmann::json::parse(res.err);
  EXPECT_NE(err["error"]["message"].get<std::string>().find("missing.txt"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bleu", "--hyp", "x"}).code, 1);
  const auto res = run({"bleu", "--bogus"});
  EXPECT_EQ(res.code, 1);
  EXPECT_NE(res.err.find("usage"), std::string::npos);
}

TEST_F(CliTest, HelpAndVersionExitZero) {
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(kVersion) + "\n");
}

TEST_F(CliTest, TokenizeReadsStandardInput) {
  const auto res = run({"tokenize"}, "Hello, world!\n1,000.5\n");
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_EQ(res.out, "Hello , world !\n1,000.5\n");
}

TEST_F(CliTest, MismatchedLineCountsAreDataErrors) {
  const auto h = file("h.txt", "a\nb\n");
  const auto r = file("r.txt", "a\n");
  EXPECT_EQ(run({"bleu", "--hyp", h, "--ref", r}).code, 2);
  EXPECT_EQ(run({"ter", "--hyp", h, "--ref", r}).code, 2);
}

TEST_F(CliTest, TerThreadsAgree) {
  std::string hyp, ref;
  for (int i = 0; i < 50; ++i) {
    hyp += "c d a b x" + std::to_string(i) + "\n";
    ref += "a b c d x" + std::to_string(i) + "\n";
  }
  const auto h = file("h.txt", hyp), r = file("r.txt", ref);
  const auto one = run({"ter", "--hyp", h, "--ref", r, "--threads", "1"});
  const auto four = run({"ter", "--hyp", h, "--ref", r, "--threads", "4"});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.json()["result"], four.json()["result"]);
  EXPECT_DOUBLE_EQ(one.json()["result"]["score"].get<double>(), 0.2);
}

TEST_F(CliTest, PairwiseTable) {
  const auto res = run({"pairwise", "--wins-a", "50", "--wins-b", "33", "--draws", "18", "--format", "table"});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NE(res.out.find("50"), std::string::npos);
  EXPECT_NE(res.out.find("0.039"), std::string::npos);
  EXPECT_EQ(run({"pairwise", "--wins-a", "0", "--wins-b", "0", "--draws", "4"}).code, 2);
}

TEST_F(CliTest, CorrelateFisher) {
  const auto res = run({"correlate", "--r", "0.9", "--n", "8"});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NEAR(res.json()["result"]["ci_low"].get<double>(), 0.534, 1e-3);
}

TEST_F(CliTest, LmTrainScoreAndFluency) {
  std::string corpus;
  for (int i = 0; i < 200; ++i) corpus += "the small cat sat on the warm mat number " + std::to_string(i % 17) + "\n";
  const auto c = file("lm.txt", corpus);
  const auto model = path("lm.arpa");
  const auto tr = run({"lm-train", "--corpus", c, "--out", model, "--order", "3"});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_TRUE(fs::exists(model));
  const auto a = file("a.txt", "the small cat sat on the warm mat\n");
  const auto b = file("b.txt", "mat warm the on sat cat small the\n");
  const auto ex = file("ex.txt", "the small cat sat on the warm mat\n");
  const auto sc = run({"lm-score", "--model", model, "--text", a});
  ASSERT_EQ(sc.code, 0) << sc.err;
  EXPECT_GT(sc.json()["result"]["ppl"].get<double>(), 1.0);
  const auto fl = run({"fluency-compare", "--model", model, "--a", a, "--b", b, "--excluded", ex, "--lm-corpus", c});
  ASSERT_EQ(fl.code, 0) << fl.err;
  EXPECT_EQ(fl.json()["result"]["winner"], "a");
}

TEST_F(CliTest, DisjointnessReportsFraction) {
  const auto lm = file("lm.txt", "a b\nc d\ne f\n");
  const auto ex = file("ex.txt", "c   d\n");
  const auto res = run({"disjointness", "--lm-corpus", lm, "--excluded", ex});
  ASSERT_EQ(res.code, 0) << res.err;
  EXPECT_NEAR(res.json()["result"]["fraction"].get<double>(), 1.0 / 3.0, 1e-12);
}

TEST_F(CliTest, DaAggregateAndHumanBootstrap) {
  std::string tsv = "rater_id\tsystem_id\titem_id\tscore\tassessment_type\tround\n";
  for (int i = 0; i < 10; ++i)
    for (int r = 0; r < 3; ++r) {
      tsv += "r" + std::to_string(r) + "\tgood\tdirect:" + std::to_string(i + 1) + "\t" + std::to_string(70 + i + r) +
             "\tsource_based\t1\n";
      tsv += "r" + std::to_string(r) + "\tbad\tdirect:" + std::to_string(i + 1) + "\t" + std::to_string(30 + i + r) +
             "\tsource_based\t1\n";
    }
  const auto j = file("j.tsv", tsv);
  const auto stats = path("stats");
  const auto res = run({"da-aggregate", "--judgements", j, "--stats-dir", stats});
  ASSERT_EQ(res.code, 0) << res.err;
  const auto sys = res.json()["result"]["systems"];
  ASSERT_EQ(sys.size(), 2u);
  const auto boot = run({"bootstrap", "--a", stats + "/good.json", "--b", stats + "/bad.json", "--metric", "human"});
  ASSERT_EQ(boot.code, 0) << boot.err;
  EXPECT_EQ(boot.json()["result"]["p_value"], 0.0);
}
