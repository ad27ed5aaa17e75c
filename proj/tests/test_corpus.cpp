#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "concierge/corpus.hpp"

using namespace concierge;

TEST(TopicCode, ParsesThreeLevels) {
  const auto t = parse_topic_code("F.01.r");
  EXPECT_EQ(t.area, 'F');
  EXPECT_EQ(t.subarea, "01");
  EXPECT_EQ(t.subdivision, 'r');
  EXPECT_EQ(parse_topic_code("A.01.a"), (TopicCode{'A', "01", 'a'}));
}

TEST(TopicCode, MissingSubdivisionIsNamed) {
  try {
    parse_topic_code("F.01");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("missing subdivision"), std::string::npos);
  }
}

TEST(TopicCode, RejectsMalformed) {
  for (const char* bad : {"", "F", "F..r", ".01.r", "F.01.", "FF.01.r", "F.1.r", "F.01.rr", "F.01.r.x", "1.01.r", "F.0-.r"})
    EXPECT_THROW(parse_topic_code(bad), ParseError) << bad;
}

TEST(TopicCode, EmptyComponentNamed) {
  try {
    parse_topic_code("F..r");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("empty subarea"), std::string::npos);
  }
}

TEST(TopicCode, FormatParseRoundTripOverRandomCodes) {
  Rng rng(7);
  const std::string alnum = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  const std::string alpha = alnum.substr(0, 52);
  for (int i = 0; i < 1000; ++i) {
    TopicCode t{alpha[uniform_below(rng, alpha.size())],
                std::string{alnum[uniform_below(rng, alnum.size())], alnum[uniform_below(rng, alnum.size())]},
                alnum[uniform_below(rng, alnum.size())]};
    EXPECT_EQ(parse_topic_code(t.str()), t);
    EXPECT_EQ(parse_topic_code(t.str()).str(), t.str());
  }
}

TEST(LoadCorpus, OneRowJsonl) {
  std::istringstream in(R"({"id": "p1", "title": "T", "abstract": "neurons fire", "keywords": ["a", "b"], "topic": "F.01.r"})");
  const auto c = read_jsonl(in);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].id, "p1");
  EXPECT_EQ(c[0].keywords.size(), 2u);
  EXPECT_EQ(c[0].topic->str(), "F.01.r");
  EXPECT_EQ(c.ordinal("p1"), 0u);
}

TEST(LoadCorpus, EmptyFileIsEmptyCorpus) {
  std::istringstream in("");
  EXPECT_TRUE(read_jsonl(in).empty());
}

TEST(LoadCorpus, DuplicateIdNamed) {
  std::istringstream in(R"({"id": "dup", "title": "", "abstract": "x", "keywords": []}
{"id": "dup", "title": "", "abstract": "y", "keywords": []})");
  try {
    read_jsonl(in);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("'dup'"), std::string::npos);
  }
}

TEST(LoadCorpus, MissingFieldReportsLine) {
  std::istringstream in(R"({"id": "a", "title": "", "abstract": "x", "keywords": []}

{"id": "b", "abstract": "x", "keywords": []})");
  try {
    read_jsonl(in);
    FAIL();
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("title"), std::string::npos) << msg;
  }
}

TEST(LoadCorpus, BadTopicIsRowError) {
  std::istringstream in(R"({"id": "a", "title": "", "abstract": "x", "keywords": [], "topic": "F.01"})");
  EXPECT_THROW(read_jsonl(in), LoadError);
}

TEST(LoadCorpus, NeedsAbstractOrKeywords) {
  std::istringstream in(R"({"id": "a", "title": "t", "abstract": "", "keywords": []})");
  EXPECT_THROW(read_jsonl(in), LoadError);
  std::istringstream ok(R"({"id": "a", "title": "t", "abstract": "", "keywords": ["k"], "topic": null})");
  EXPECT_FALSE(read_jsonl(ok)[0].topic.has_value());
}

TEST(LoadCorpus, CsvWithQuotesAndPipes) {
  std::istringstream in(
      "id,title,abstract,keywords,topic\n"
      "p1,\"A, B\",\"text with \"\"quotes\"\"\nand a newline\",alpha|beta gamma,F.01.r\n"
      "p2,T2,plain,,\n");
  const auto c = read_csv(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].title, "A, B");
  EXPECT_EQ(c[0].abstract, "text with \"quotes\"\nand a newline");
  EXPECT_EQ(c[0].keywords, (std::vector<std::string>{"alpha", "beta gamma"}));
  EXPECT_FALSE(c[1].topic.has_value());
}

TEST(LoadCorpus, CsvMissingColumn) {
  std::istringstream in("id,title,abstract\np1,t,a\n");
  EXPECT_THROW(read_csv(in), LoadError);
}

TEST(LoadCorpus, MissingFileNamesPath) {
  try {
    load_corpus("/nonexistent/corpus.jsonl");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/corpus.jsonl"), std::string::npos);
  }
}

TEST(LoadCorpus, JsonlRoundTrip) {
  const auto c = generate_synthetic_corpus(SyntheticConfig{.n_areas = 2, .docs_per_leaf = 2});
  std::istringstream in(to_jsonl(c));
  const auto back = read_jsonl(in);
  EXPECT_EQ(to_jsonl(back), to_jsonl(c));
  EXPECT_EQ(corpus_fingerprint(back), corpus_fingerprint(c));
}

TEST(Synthetic, DeterministicForSeed) {
  SyntheticConfig cfg;
  EXPECT_EQ(to_jsonl(generate_synthetic_corpus(cfg)), to_jsonl(generate_synthetic_corpus(cfg)));
  SyntheticConfig other = cfg;
  other.seed = 1;
  EXPECT_NE(to_jsonl(generate_synthetic_corpus(cfg)), to_jsonl(generate_synthetic_corpus(other)));
}

TEST(Synthetic, Counting) {
  SyntheticConfig cfg{.n_areas = 2, .n_subareas_per_area = 1, .n_subdivisions_per_subarea = 1, .docs_per_leaf = 5};
  const auto c = generate_synthetic_corpus(cfg);
  EXPECT_EQ(c.size(), 10u);
  std::set<std::string> topics;
  for (const auto& d : c) topics.insert(d.topic->str());
  EXPECT_EQ(topics.size(), 2u);
  EXPECT_TRUE(c.fully_labeled());
}

TEST(Synthetic, DefaultSize) { EXPECT_EQ(generate_synthetic_corpus({}).size(), 1680u); }

TEST(Synthetic, KeywordsComeFromLeafVocabulary) {
  SyntheticConfig cfg{.n_areas = 3, .docs_per_leaf = 3};
  for (const auto& d : generate_synthetic_corpus(cfg)) {
    const auto vocab = synthetic_leaf_vocabulary(cfg, *d.topic);
    const std::set<std::string> allowed(vocab.begin(), vocab.end());
    EXPECT_EQ(d.keywords.size(), static_cast<std::size_t>(cfg.keywords_per_doc));
    EXPECT_EQ(std::set<std::string>(d.keywords.begin(), d.keywords.end()).size(), d.keywords.size());
    for (const auto& k : d.keywords) EXPECT_TRUE(allowed.count(k)) << k;
    std::istringstream words(d.abstract);
    for (std::string w; words >> w;) EXPECT_TRUE(allowed.count(w)) << w;
  }
}

namespace {

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

TEST(Synthetic, SiblingLeafVocabulariesOverlapMoreThanCrossArea) {
  SyntheticConfig cfg;
  const auto leaves = synthetic_leaves(cfg);
  double sibling = 0, cross = 0;
  int ns = 0, nc = 0;
  for (const auto& a : leaves)
    for (const auto& b : leaves) {
      if (a == b) continue;
      const double j = jaccard(synthetic_leaf_vocabulary(cfg, a), synthetic_leaf_vocabulary(cfg, b));
      if (a.subarea_key() == b.subarea_key()) sibling += j, ++ns;
      else if (a.area != b.area) cross += j, ++nc;
    }
  // Path unions of 4 x 20 tokens: siblings share 3 nodes (60/100), other areas share the root (20/140).
  EXPECT_NEAR(sibling / ns, 60.0 / 100.0, 1e-12);
  EXPECT_NEAR(cross / nc, 20.0 / 140.0, 1e-12);
}

TEST(Synthetic, WithinLeafDocumentOverlapExceedsCrossArea) {
  const auto c = generate_synthetic_corpus({});
  Rng rng(3);
  double within = 0, cross = 0;
  int nw = 0, nc = 0;
  while (nw < 300 || nc < 300) {
    const auto i = uniform_below(rng, c.size());
    const auto k = i - i % 20 + uniform_below(rng, 20);
    if (k != i && nw < 300) within += jaccard(words(c[i].abstract), words(c[k].abstract)), ++nw;
    const auto j = uniform_below(rng, c.size());
    if (c[i].topic->area != c[j].topic->area && nc < 300) cross += jaccard(words(c[i].abstract), words(c[j].abstract)), ++nc;
  }
  EXPECT_GT(within / nw, cross / nc);
}

TEST(Synthetic, ConfigValidation) {
  SyntheticConfig bad;
  bad.mixture = {0.5, 0.5, 0.5, 0.0};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  SyntheticConfig zero;
  zero.docs_per_leaf = 0;
  EXPECT_THROW(zero.validate(), InvalidArgument);
  const auto j = nlohmann::json::parse(R"({"n_areas": 2, "mixture": {"root": 0.25, "area": 0.25, "subarea": 0.25, "leaf": 0.25}})");
  const auto c = synthetic_config_from_json(j);
  EXPECT_EQ(c.n_areas, 2);
  EXPECT_EQ(synthetic_config_from_json(nlohmann::json::parse(synthetic_config_to_json(c).dump())).mixture, c.mixture);
}
