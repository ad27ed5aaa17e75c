#include <sstream>

#include <gtest/gtest.h>

#include "concierge/embedding.hpp"

using namespace concierge;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

Eigen::MatrixXd random_dense(int rows, int cols, std::uint64_t seed, double density = 0.3) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (u(rng) < density) m(i, j) = u(rng) * 3.0;
  return m;
}

Document doc(std::string id, std::string abstract, std::vector<std::string> keywords = {}) {
  return Document{std::move(id), "", std::move(abstract), std::move(keywords), std::nullopt};
}

}  // namespace

TEST(Svd, DiagonalMatrix) {
  Eigen::MatrixXd x = Eigen::Vector3d(3, 2, 1).asDiagonal();
  const auto m = truncated_svd(sparse(x), 2);
  EXPECT_NEAR(m.S[0], 3.0, 1e-12);
  EXPECT_NEAR(m.S[1], 2.0, 1e-12);
  Eigen::MatrixXd expected(3, 2);
  expected << 3, 0, 0, 2, 0, 0;
  EXPECT_TRUE(Eigen::MatrixXd(embed_lsa(m).vectors).isApprox(expected, 1e-12));
}

TEST(Svd, MatchesJacobiOracle) {
  for (int seed = 0; seed < 5; ++seed) {
    const int rows = 20 + 6 * seed, cols = 50 - 5 * seed;
    const Eigen::MatrixXd x = random_dense(rows, cols, static_cast<std::uint64_t>(seed));
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int r = 7;
    const auto m = truncated_svd(sparse(x), r);
    for (int k = 0; k < r; ++k) {
      EXPECT_NEAR(m.S[k], oracle.singularValues()[k], 1e-6);
      // Singular vectors agree up to sign.
      EXPECT_NEAR(std::abs(m.U.col(k).dot(oracle.matrixU().col(k))), 1.0, 1e-6);
      EXPECT_NEAR(std::abs(m.V.col(k).dot(oracle.matrixV().col(k))), 1.0, 1e-6);
    }
    const Eigen::MatrixXd rec = m.U * m.S.asDiagonal() * m.V.transpose();
    const Eigen::MatrixXd rec_oracle = oracle.matrixU().leftCols(r) * oracle.singularValues().head(r).asDiagonal() *
                                       oracle.matrixV().leftCols(r).transpose();
    EXPECT_LT((rec - rec_oracle).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Svd, RandomizedPathRecoversLowRankMatrix) {
  const Eigen::MatrixXd a = random_dense(300, 12, 8, 0.5), b = random_dense(12, 400, 9, 0.5);
  const Eigen::MatrixXd x = a * b;
  const int r = 10;
  const auto m = truncated_svd(sparse(x), r, SvdOptions{.seed = 3});
  Eigen::BDCSVD<Eigen::MatrixXd> oracle(x);
  for (int k = 0; k < r; ++k) EXPECT_NEAR(m.S[k] / oracle.singularValues()[k], 1.0, 1e-8);
  EXPECT_TRUE((m.U.transpose() * m.U).isApprox(Eigen::MatrixXd::Identity(r, r), 1e-10));
  EXPECT_TRUE((m.V.transpose() * m.V).isApprox(Eigen::MatrixXd::Identity(r, r), 1e-10));
}

TEST(Svd, RandomizedPathIsDeterministicForSeed) {
  const Eigen::MatrixXd x = random_dense(250, 300, 4, 0.05);
  const auto a = truncated_svd(sparse(x), 5, SvdOptions{.seed = 1});
  const auto b = truncated_svd(sparse(x), 5, SvdOptions{.seed = 1});
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.S, b.S);
}

TEST(Svd, SignConventionLargestVEntryPositive) {
  const auto m = truncated_svd(sparse(random_dense(30, 40, 12)), 6);
  for (int k = 0; k < 6; ++k) {
    Eigen::Index arg;
    m.V.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(m.V(arg, k), 0.0);
  }
}

TEST(Svd, ReconstructionErrorNonIncreasingInRank) {
  const Eigen::MatrixXd x = random_dense(40, 45, 21);
  double previous = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= 40; r += 3) {
    const auto m = truncated_svd(sparse(x), r);
    const double err = (x - m.U * m.S.asDiagonal() * m.V.transpose()).norm();
    EXPECT_LE(err, previous + 1e-9) << r;
    previous = err;
  }
}

TEST(Svd, RejectsBadComponentCount) {
  const auto x = sparse(random_dense(5, 8, 1));
  EXPECT_THROW(truncated_svd(x, 0), InvalidArgument);
  EXPECT_THROW(truncated_svd(x, 6), InvalidArgument);
  EXPECT_NO_THROW(truncated_svd(x, 5));
}

TEST(WordVec, MeanOfStemmedTokenVectors) {
  const auto table = load_word_vectors(CONCIERGE_TEST_DATA "/wordvec_fixture.txt");
  ASSERT_EQ(table.dim(), 3);
  const Corpus c({doc("a", "Sparse neurons"), doc("b", "nothing familiar here"), doc("c", "Dopamine dopamine cortex")});
  const auto e = embed_wordvec(c, table);
  EXPECT_TRUE(e.vectors.row(0).isApprox(Eigen::RowVector3d(0.75, 0, 0.25)));
  EXPECT_TRUE(e.vectors.row(1).isZero());
  EXPECT_TRUE(e.vectors.row(2).isApprox(Eigen::RowVector3d(0, 2.0 / 3, 1.0 / 3)));
  EXPECT_EQ(e.zero_rows, (std::vector<bool>{false, true, false}));
}

TEST(WordVec, LoaderErrorsNameTheLine) {
  std::istringstream ragged("a 1 2\n\nb 1 2 3\n");
  try {
    read_word_vectors(ragged);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream bad("a 1 x\n");
  EXPECT_THROW(read_word_vectors(bad), LoadError);
  std::istringstream dup("a 1\na 2\n");
  EXPECT_THROW(read_word_vectors(dup), LoadError);
  EXPECT_THROW(load_word_vectors("/nonexistent/vectors.txt"), LoadError);
  EXPECT_THROW(embed_wordvec(Corpus({doc("a", "x")}), WordVectorTable{}), FitError);
}

TEST(Keywords, Normalization) {
  EXPECT_EQ(normalize_keyword("  Deep \t Learning "), "deep learning");
  EXPECT_EQ(normalize_keyword("   "), "");
}

TEST(Keywords, EqualsExplicitComposition) {
  const auto c = generate_synthetic_corpus(SyntheticConfig{.n_areas = 3, .docs_per_leaf = 6});
  const auto km = fit_keywords(c, 12);
  const auto docs = keyword_documents(c);
  const auto vocab = build_vocabulary(docs, 1, 1.0);
  EXPECT_EQ(km.vocabulary, vocab);
  const auto lsa = truncated_svd(weight_tfidf(count_matrix(docs, vocab)).values, 12);
  EXPECT_TRUE(Eigen::MatrixXd(km.embedding.vectors).isApprox(lsa.U * lsa.S.asDiagonal(), 1e-12));
  EXPECT_EQ(km.embedding.dim(), 12);
}

TEST(Keywords, MissingKeywordsAreZeroRows) {
  const Corpus c({doc("a", "x", {"alpha", "beta"}), doc("b", "y", {"beta", "Gamma"}), doc("c", "z"),
                  doc("d", "w", {"alpha", "gamma"})});
  const auto e = embed_keywords(c, 2);
  EXPECT_EQ(e.zero_rows, (std::vector<bool>{false, false, true, false}));
  EXPECT_THROW(embed_keywords(Corpus({doc("a", "x")}), 1), FitError);
}
