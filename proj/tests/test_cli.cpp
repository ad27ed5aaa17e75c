#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CONCIERGE_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir = fs::temp_directory_path() / "concierge-cli-test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "syn.json") << R"({"n_areas": 3, "n_subareas_per_area": 2, "n_subdivisions_per_subarea": 2, "docs_per_leaf": 8})";
    ASSERT_EQ(run("generate --config " + (dir / "syn.json").string() + " --out " + (dir / "corpus.jsonl").string()).code, 0);
    ASSERT_EQ(run("fit --corpus " + (dir / "corpus.jsonl").string() + " --components 12 --min-count 2 --out " +
                  (dir / "model.bin").string())
                  .code,
              0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir); }

  static std::string path(const char* name) { return (dir / name).string(); }
  static fs::path dir;
};

fs::path Cli::dir;

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("recommend"), std::string::npos);
  EXPECT_EQ(run("evaluate compare --help").code, 0);
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("recommend --model " + path("model.bin")).code, 1);
  EXPECT_EQ(run("fit --corpus " + path("corpus.jsonl") + " --components 0 --out " + path("x.bin")).code, 1);
  EXPECT_EQ(run("fit --corpus " + path("corpus.jsonl") + " --scheme bogus --out " + path("x.bin")).code, 1);
  EXPECT_EQ(run("evaluate sweep-rocchio --synthetic " + path("syn.json") + " --dislike-distance 4").code, 1);
}

TEST_F(Cli, DataErrorsExitTwo) {
  EXPECT_EQ(run("fit --corpus " + path("missing.jsonl") + " --out " + path("x.bin")).code, 2);
  EXPECT_EQ(run("recommend --model " + path("model.bin") + " --like nope").code, 2);
  EXPECT_EQ(run("recommend --model " + path("corpus.jsonl") + " --like syn-000001").code, 2);
  EXPECT_EQ(run("fit --corpus " + path("corpus.jsonl") + " --components 500 --out " + path("x.bin")).code, 2);
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"a\"}\n";
  EXPECT_EQ(run("fit --corpus " + path("bad.jsonl") + " --out " + path("x.bin")).code, 2);
}

TEST_F(Cli, RecommendJsonAndTsv) {
  const auto j = run("recommend --model " + path("model.bin") + " --like syn-000001 --like syn-000002 -k 5");
  ASSERT_EQ(j.code, 0);
  const auto parsed = nlohmann::json::parse(j.out);
  ASSERT_EQ(parsed.size(), 5u);
  for (const auto& r : parsed) {
    EXPECT_NE(r["id"], "syn-000001");
    EXPECT_NE(r["id"], "syn-000002");
  }
  const auto t = run("recommend --model " + path("model.bin") + " --like syn-000001 --like syn-000002 -k 5 --output-format tsv");
  ASSERT_EQ(t.code, 0);
  std::istringstream lines(t.out);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  EXPECT_GE(rows, 5u);
}

TEST_F(Cli, FingerprintMismatchNeedsForce) {
  std::ofstream(dir / "other.json") << R"({"n_areas": 2, "docs_per_leaf": 3})";
  ASSERT_EQ(run("generate --config " + path("other.json") + " --out " + path("other.jsonl")).code, 0);
  const std::string base = "recommend --model " + path("model.bin") + " --like syn-000001 --corpus " + path("other.jsonl");
  EXPECT_EQ(run(base).code, 2);
  EXPECT_EQ(run(base + " --force").code, 0);
  EXPECT_EQ(run("recommend --model " + path("model.bin") + " --like syn-000001 --corpus " + path("corpus.jsonl")).code, 0);
}

TEST_F(Cli, FitIsByteIdentical) {
  ASSERT_EQ(run("fit --corpus " + path("corpus.jsonl") + " --components 12 --min-count 2 --out " + path("again.bin")).code, 0);
  EXPECT_EQ(slurp(dir / "model.bin"), slurp(dir / "again.bin"));
}

TEST_F(Cli, EvaluateOutputsAreByteIdentical) {
  const std::string syn = " --synthetic " + path("syn.json") + " --min-count 2 --runs 20";
  const std::vector<std::pair<std::string, std::string>> cmds{
      {"evaluate sweep-components" + syn + " --grid 2,8", "component_count,mean_distance,stderr,n_runs"},
      {"evaluate sweep-rocchio" + syn + " --components 12 --alphas 1,2 --betas 0,0.5 --dislike-distance 2",
       "alpha,beta,dislike_distance,mean_distance,stderr,n_runs"},
      {"evaluate compare" + syn + " --components 12 --keyword-components 6 --votes 3 --schemes random,tfidf,keywords",
       "scheme,n_votes,mean_distance,stderr,n_runs"},
      {"evaluate baseline-random" + syn + " --votes 3", "scheme,n_votes,mean_distance,stderr,n_runs"},
  };
  for (const auto& [cmd, header] : cmds) {
    const auto a = run(cmd), b = run(cmd);
    ASSERT_EQ(a.code, 0) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
    EXPECT_EQ(a.out.substr(0, a.out.find('\n')), header) << cmd;
  }
}

TEST_F(Cli, CorrelateWritesPairsAndJson) {
  const auto r = run("evaluate correlate --synthetic " + path("syn.json") +
                     " --min-count 2 --components 12 --schemes tfidf,onehot --pairs 300 --output-format json --pairs-out " +
                     path("pairs.csv"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_TRUE(j.is_array());
  bool saw_onehot = false;
  for (const auto& row : j)
    if (row["scheme"] == "onehot") {
      saw_onehot = true;
      EXPECT_NEAR(row["spearman"].get<double>(), 1.0, 1e-12);
    }
  EXPECT_TRUE(saw_onehot);
  const auto pairs = slurp(dir / "pairs.csv");
  EXPECT_EQ(pairs.rfind("scheme,doc_a,doc_b,topic_distance,model_distance,model_z", 0), 0u) << pairs.substr(0, 80);
}

TEST_F(Cli, GenerateIsDeterministic) {
  const auto a = run("generate --config " + path("syn.json"));
  const auto b = run("generate --config " + path("syn.json"));
  const auto c = run("generate --config " + path("syn.json") + " --seed 5");
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(a.out, slurp(dir / "corpus.jsonl"));
}
