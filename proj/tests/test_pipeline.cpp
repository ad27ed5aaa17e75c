#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "concierge/pipeline.hpp"

using namespace concierge;

namespace {

Corpus small() {
  return generate_synthetic_corpus(
      SyntheticConfig{.n_areas = 3, .n_subareas_per_area = 2, .n_subdivisions_per_subarea = 2, .docs_per_leaf = 8});
}

PipelineConfig config_for(Scheme s) {
  PipelineConfig c;
  c.scheme = s;
  c.components = 16;
  c.keyword_components = 8;
  c.min_count = 2;
  if (s == Scheme::wordvec) c.word_vectors = CONCIERGE_TEST_DATA "/wordvec_fixture.txt";
  return c;
}

VoteSet votes_for(const Corpus& c) { return VoteSet({c[0].id, c[1].id}, {c[60].id}); }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("concierge-test-" + name)).string();
}

}  // namespace

TEST(Pipeline, RoundTripEverySchemeGivesIdenticalRecommendations) {
  for (Scheme s : {Scheme::tf, Scheme::tfidf, Scheme::logentropy, Scheme::keywords}) {
    const auto m = fit(small(), config_for(s));
    const auto bytes = serialize_model(m);
    const auto back = deserialize_model(bytes);
    EXPECT_EQ(serialize_model(back), bytes) << to_string(s);
    EXPECT_EQ(back.vocabulary, m.vocabulary);
    EXPECT_EQ(back.embedding.vectors, m.embedding.vectors);
    const auto a = m.recommend(votes_for(*m.corpus), std::nullopt, 15);
    const auto b = back.recommend(votes_for(*back.corpus), std::nullopt, 15);
    ASSERT_EQ(a.items.size(), b.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
      EXPECT_EQ(a.items[i].id, b.items[i].id);
      EXPECT_EQ(a.items[i].distance, b.items[i].distance);
    }
  }
}

TEST(Pipeline, LogEntropyKeepsGlobalWeights) {
  const auto m = fit(small(), config_for(Scheme::logentropy));
  ASSERT_TRUE(m.global_weights);
  const auto back = deserialize_model(serialize_model(m));
  ASSERT_TRUE(back.global_weights);
  EXPECT_EQ(back.global_weights->g, m.global_weights->g);
  ASSERT_TRUE(back.lsa);
  EXPECT_EQ(back.lsa->U, m.lsa->U);
  EXPECT_EQ(back.lsa->V, m.lsa->V);
}

TEST(Pipeline, WordVecScheme) {
  const Corpus c({{"a", "", "sparse neurons", {}, std::nullopt}, {"b", "", "dopamine", {}, std::nullopt},
                  {"c", "", "cortex neurons", {}, std::nullopt}});
  const auto m = fit(c, config_for(Scheme::wordvec));
  EXPECT_EQ(m.embedding.dim(), 3);
  EXPECT_FALSE(m.lsa);
  const auto r = m.recommend(VoteSet({"a"}, {}), RocchioParams{.alpha = 1.0}, 2);
  EXPECT_EQ(r.items[0].id, "c");
  EXPECT_EQ(deserialize_model(serialize_model(m)).embedding.vectors, m.embedding.vectors);
}

TEST(Pipeline, FileRoundTrip) {
  const auto path = temp_path("model.bin");
  const auto m = fit(small(), config_for(Scheme::tfidf));
  save_model(m, path);
  const auto back = load_model(path);
  EXPECT_EQ(back.fingerprint, m.fingerprint);
  EXPECT_EQ(back.config.to_json(), m.config.to_json());
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), LoadError);
}

TEST(Pipeline, RefitIsByteIdentical) {
  EXPECT_EQ(serialize_model(fit(small(), config_for(Scheme::tfidf))),
            serialize_model(fit(small(), config_for(Scheme::tfidf))));
  // The randomized solver path too.
  const auto big = generate_synthetic_corpus(SyntheticConfig{.n_areas = 3, .docs_per_leaf = 12});
  auto c = config_for(Scheme::tfidf);
  c.components = 30;
  EXPECT_EQ(serialize_model(fit(big, c)), serialize_model(fit(big, c)));
}

TEST(Pipeline, CorruptFilesAreRejected) {
  const auto bytes = serialize_model(fit(small(), config_for(Scheme::tfidf)));
  EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 8)), LoadError);
  EXPECT_THROW(deserialize_model(bytes.substr(0, 40)), LoadError);
  EXPECT_THROW(deserialize_model(bytes + "x"), LoadError);
  EXPECT_THROW(deserialize_model("NOTAMODEL"), LoadError);
  auto wrong_version = bytes;
  wrong_version[model_magic.size()] = 9;
  try {
    deserialize_model(wrong_version);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  // Tamper with the embedded corpus text without changing its length.
  auto tampered = bytes;
  const auto pos = tampered.find("synthetic abstract");
  ASSERT_NE(pos, std::string::npos);
  tampered[pos] = 'S';
  EXPECT_THROW(deserialize_model(tampered), LoadError);
}

TEST(Pipeline, FitErrorsNameTheStage) {
  auto c = config_for(Scheme::tfidf);
  c.min_count = 1000;
  try {
    fit(small(), c);
    FAIL();
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("vocabulary"), std::string::npos);
  }
  c = config_for(Scheme::tfidf);
  c.components = 5000;
  EXPECT_THROW(fit(small(), c), FitError);
  c = config_for(Scheme::tfidf);
  c.components = 0;
  EXPECT_THROW(fit(small(), c), InvalidArgument);
  EXPECT_THROW(fit(Corpus{}, config_for(Scheme::tfidf)), FitError);
}

TEST(Pipeline, ConfigJsonRoundTrip) {
  auto c = config_for(Scheme::logentropy);
  c.metric = Metric::cosine;
  c.rocchio = {.alpha = 1.25, .beta = 0.5, .center_on_corpus_mean = true};
  c.seed = 42;
  const auto back = PipelineConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_THROW(parse_scheme("bm25"), InvalidArgument);
}

TEST(Pipeline, RecommendUsesConfigDefaults) {
  const auto m = fit(small(), config_for(Scheme::tfidf));
  const auto r = m.recommend(votes_for(*m.corpus));
  EXPECT_EQ(r.items.size(), m.config.k);
  for (const auto& item : r.items) {
    EXPECT_NE(item.id, (*m.corpus)[0].id);
    EXPECT_NE(item.id, (*m.corpus)[60].id);
  }
}
