#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "concierge/textprep.hpp"

using namespace concierge;

TEST(Porter, MatchesReferenceTable) {
  std::ifstream in(CONCIERGE_TEST_DATA "/porter_reference.tsv");
  ASSERT_TRUE(in) << "missing reference table";
  std::size_t n = 0, wrong = 0;
  for (std::string line; std::getline(in, line);) {
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos) << line;
    const auto word = line.substr(0, tab), expected = line.substr(tab + 1);
    if (stem(word) != expected) {
      ++wrong;
      ADD_FAILURE() << word << ": got " << stem(word) << ", want " << expected;
    }
    ++n;
  }
  EXPECT_GT(n, 5000u);
  EXPECT_EQ(wrong, 0u);
}

TEST(Porter, ClassicExamples) {
  EXPECT_EQ(stem("caresses"), "caress");
  EXPECT_EQ(stem("ponies"), "poni");
  EXPECT_EQ(stem("relational"), "relat");
  EXPECT_EQ(stem("generalizations"), "gener");
  EXPECT_EQ(stem("dopamine"), "dopamin");
  EXPECT_EQ(stem("neurons"), "neuron");
}

TEST(StopWords, CommonWordsAreStopWords) {
  for (const char* w : {"the", "and", "a", "of", "which", "however", "would"}) EXPECT_TRUE(is_stop_word(w)) << w;
  for (const char* w : {"neuron", "dopamine", "matrix"}) EXPECT_FALSE(is_stop_word(w)) << w;
}

TEST(Tokenize, LowercasesSplitsStemsAndDropsStopWords) {
  EXPECT_EQ(tokenize("Dopamine neurons fire, and the 3rd-order systems!"),
            (std::vector<std::string>{"dopamin", "neuron", "fire", "order", "system"}));
}

TEST(Tokenize, ShortSentences) {
  EXPECT_EQ(tokenize("The neurons are firing"), (std::vector<std::string>{"neuron", "fire"}));
  EXPECT_EQ(tokenize("Dopamine, dopamine!"), (std::vector<std::string>{"dopamin", "dopamin"}));
  EXPECT_EQ(tokenize("spike-timing"), (std::vector<std::string>{"spike", "time"}));
}

TEST(Tokenize, NonAsciiIsSeparator) {
  EXPECT_EQ(tokenize("na\xc3\xafve neurons"), (std::vector<std::string>{"na", "ve", "neuron"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("12 34 -- !!").empty());
}

TEST(ExtractTerms, UnigramsThenBigrams) {
  EXPECT_EQ(extract_terms({"a", "b", "c"}), (std::vector<std::string>{"a", "b", "c", "a b", "b c"}));
  EXPECT_EQ(extract_terms({"x"}), (std::vector<std::string>{"x"}));
  EXPECT_TRUE(extract_terms({}).empty());
}

TEST(ExtractTerms, BigramsSpanRemovedStopWords) {
  EXPECT_EQ(analyze("neurons of the cortex"),
            (std::vector<std::string>{"neuron", "cortex", "neuron cortex"}));
}

TEST(Vocabulary, PrunesByDocumentFrequency) {
  // df: a=5, b=4, c=2, d=1 across 5 documents.
  const std::vector<std::vector<std::string>> docs{
      {"a", "b", "c", "d"}, {"a", "b", "c"}, {"a", "b"}, {"a", "b", "a"}, {"a"}};
  const auto v = build_vocabulary(docs, 2, 0.8);
  EXPECT_EQ(v.terms(), (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(v.document_frequencies(), (std::vector<std::size_t>{4, 2}));
  EXPECT_EQ(v.n_documents(), 5u);
  EXPECT_EQ(build_vocabulary(docs, 1, 1.0).terms(), (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(build_vocabulary(docs, 3, 1.0).terms(), (std::vector<std::string>{"a", "b"}));
}

TEST(Vocabulary, BoundaryIsInclusive) {
  // df = 4 of 5 is exactly 0.8 n.
  const std::vector<std::vector<std::string>> docs{{"x"}, {"x"}, {"x"}, {"x"}, {"y"}};
  EXPECT_TRUE(build_vocabulary(docs, 1, 0.8).index("x"));
  EXPECT_FALSE(build_vocabulary(docs, 1, 0.79).index("x"));
}

TEST(Vocabulary, IndicesAreLexicographic) {
  const std::vector<std::vector<std::string>> docs{{"zeta", "alpha", "mid"}, {"mid", "alpha beta"}};
  const auto v = build_vocabulary(docs, 1, 1.0);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(v.term(i - 1), v.term(i));
  EXPECT_EQ(*v.index("alpha"), 0u);
  EXPECT_EQ(*v.index("alpha beta"), 1u);
}

TEST(Vocabulary, JsonRoundTrip) {
  const std::vector<std::vector<std::string>> docs{{"p", "q"}, {"q", "r s"}};
  const auto v = build_vocabulary(docs, 1, 1.0);
  EXPECT_EQ(Vocabulary::from_json(nlohmann::json::parse(v.to_json().dump())), v);
}

TEST(Vocabulary, Errors) {
  EXPECT_THROW(build_vocabulary(std::vector<std::vector<std::string>>{}, 1, 1.0), FitError);
  EXPECT_THROW(build_vocabulary({{"a"}}, 1, 0.0), InvalidArgument);
  EXPECT_THROW(build_vocabulary({{"a"}}, 1, 1.5), InvalidArgument);
}

TEST(CountMatrix, EqualsIndependentRecount) {
  const auto corpus = generate_synthetic_corpus(SyntheticConfig{.n_areas = 2, .docs_per_leaf = 4});
  const auto docs = analyze_corpus(corpus);
  const auto v = build_vocabulary(docs, 2, 0.9);
  const auto m = count_matrix(corpus, v);
  ASSERT_EQ(m.rows(), static_cast<Eigen::Index>(corpus.size()));
  ASSERT_EQ(m.cols(), static_cast<Eigen::Index>(v.size()));
  const Eigen::MatrixXd dense = m.counts;
  for (std::size_t j = 0; j < docs.size(); ++j) {
    std::map<std::string, int> tally;
    for (const auto& t : docs[j]) ++tally[t];
    double total = 0;
    for (const auto& [t, c] : tally)
      if (auto i = v.index(t)) {
        EXPECT_EQ(dense(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(*i)), c) << t;
        total += c;
      }
    EXPECT_DOUBLE_EQ(dense.row(static_cast<Eigen::Index>(j)).sum(), total);
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto col = dense.col(static_cast<Eigen::Index>(i));
    EXPECT_EQ(static_cast<std::size_t>((col.array() > 0).count()), v.document_frequency(i));
    EXPECT_EQ(m.df[static_cast<Eigen::Index>(i)], static_cast<double>(v.document_frequency(i)));
  }
}

TEST(CountMatrix, UnknownTermsIgnored) {
  const auto v = build_vocabulary({{"a", "b"}, {"a"}}, 1, 1.0);
  const auto m = count_matrix({{"a", "a", "zzz"}}, v);
  EXPECT_EQ(m.counts.coeff(0, 0), 2.0);
  EXPECT_EQ(m.counts.nonZeros(), 1);
}
