#pragma once

// Tokenizing, n-gram term extraction, vocabulary pruning and sparse counts.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "json.hpp"

#include "concierge/corpus.hpp"
#include "concierge/errors.hpp"
#include "concierge/porter.hpp"
#include "concierge/stopwords.hpp"

namespace concierge {

/// Lowercase ASCII letters split on everything else; stop words dropped before
/// and after stemming.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (!is_stop_word(word)) {
      auto s = stem(word);
      if (!s.empty() && !is_stop_word(s)) out.push_back(std::move(s));
    }
    word.clear();
  };
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') word += static_cast<char>(c - 'A' + 'a');
    else if (c >= 'a' && c <= 'z') word += c;
    else flush();
  }
  flush();
  return out;
}

/// Unigrams followed by adjacent bigrams joined with one space.
inline std::vector<std::string> extract_terms(const std::vector<std::string>& tokens) {
  std::vector<std::string> terms(tokens.begin(), tokens.end());
  if (tokens.size() > 1) terms.reserve(2 * tokens.size() - 1);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) terms.push_back(tokens[i] + ' ' + tokens[i + 1]);
  return terms;
}

inline std::vector<std::string> analyze(std::string_view text) { return extract_terms(tokenize(text)); }

/// Term lists for every document's abstract.
inline std::vector<std::vector<std::string>> analyze_corpus(const Corpus& corpus) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const auto& d : corpus) out.push_back(analyze(d.abstract));
  return out;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Terms must be unique; index i is terms[i].
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n)
      : terms_(std::move(terms)), df_(std::move(df)), n_(n) {
    if (terms_.size() != df_.size()) throw InvalidArgument("vocabulary: terms and frequencies differ in length");
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (!index_.emplace(terms_[i], i).second) throw LoadError("vocabulary: duplicate term '" + terms_[i] + "'");
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  std::size_t n_documents() const noexcept { return n_; }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  std::size_t document_frequency(std::size_t i) const { return df_[i]; }
  const std::vector<std::size_t>& document_frequencies() const noexcept { return df_; }

  std::optional<std::size_t> index(const std::string& term) const {
    const auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n_;
    auto triples = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < terms_.size(); ++i) triples.push_back({terms_[i], i, df_[i]});
    j["terms"] = std::move(triples);
    return j;
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    const auto& triples = j.at("terms");
    std::vector<std::string> terms(triples.size());
    std::vector<std::size_t> df(triples.size());
    for (const auto& t : triples) {
      const auto i = t.at(1).get<std::size_t>();
      if (i >= terms.size() || !terms[i].empty()) throw LoadError("vocabulary: bad term index " + std::to_string(i));
      terms[i] = t.at(0).get<std::string>();
      df[i] = t.at(2).get<std::size_t>();
    }
    return Vocabulary(std::move(terms), std::move(df), j.at("n").get<std::size_t>());
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.n_ == b.n_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::size_t n_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Keeps terms with min_count <= df <= max_df_ratio * n, indexed in lexicographic order.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs, std::size_t min_count = 3,
                                   double max_df_ratio = 0.8) {
  if (docs.empty()) throw FitError("vocabulary: empty corpus");
  if (!(max_df_ratio > 0.0 && max_df_ratio <= 1.0)) throw InvalidArgument("vocabulary: max_df_ratio must be in (0, 1]");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& terms : docs) {
    std::vector<const std::string*> seen;
    seen.reserve(terms.size());
    for (const auto& t : terms) seen.push_back(&t);
    std::sort(seen.begin(), seen.end(), [](auto* a, auto* b) { return *a < *b; });
    seen.erase(std::unique(seen.begin(), seen.end(), [](auto* a, auto* b) { return *a == *b; }), seen.end());
    for (auto* t : seen) ++df[*t];
  }
  const double max_df = max_df_ratio * static_cast<double>(docs.size());
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, f] : df)
    if (f >= min_count && static_cast<double>(f) <= max_df) kept.emplace_back(term, f);
  std::sort(kept.begin(), kept.end());
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  terms.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [term, f] : kept) {
    terms.push_back(std::move(term));
    freqs.push_back(f);
  }
  return Vocabulary(std::move(terms), std::move(freqs), docs.size());
}

inline Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_count = 3, double max_df_ratio = 0.8) {
  if (corpus.empty()) throw FitError("vocabulary: empty corpus");
  return build_vocabulary(analyze_corpus(corpus), min_count, max_df_ratio);
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Documents as rows, terms as columns, with the document frequencies f_i and
/// corpus size n that the weighting schemes use.
struct TermDocMatrix {
  SparseMatrix counts;
  Eigen::VectorXd df;
  std::size_t n = 0;

  Eigen::Index rows() const { return counts.rows(); }
  Eigen::Index cols() const { return counts.cols(); }

  /// Statistics taken from the matrix itself.
  static TermDocMatrix from_counts(SparseMatrix m) {
    TermDocMatrix t;
    t.df = Eigen::VectorXd::Zero(m.cols());
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it)
        if (it.value() != 0.0) t.df[it.col()] += 1.0;
    t.n = static_cast<std::size_t>(m.rows());
    t.counts = std::move(m);
    return t;
  }

  static TermDocMatrix from_dense(const Eigen::MatrixXd& dense) { return from_counts(dense.sparseView(0.0, 0.0)); }
};

inline TermDocMatrix count_matrix(const std::vector<std::vector<std::string>>& docs, const Vocabulary& vocab) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t j = 0; j < docs.size(); ++j)
    for (const auto& t : docs[j])
      if (auto i = vocab.index(t)) triplets.emplace_back(static_cast<int>(j), static_cast<int>(*i), 1.0);
  TermDocMatrix m;
  m.counts.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(vocab.size()));
  m.counts.setFromTriplets(triplets.begin(), triplets.end());
  m.counts.makeCompressed();
  m.df.resize(static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t i = 0; i < vocab.size(); ++i) m.df[static_cast<Eigen::Index>(i)] = static_cast<double>(vocab.document_frequency(i));
  m.n = vocab.n_documents();
  return m;
}

inline TermDocMatrix count_matrix(const Corpus& corpus, const Vocabulary& vocab) {
  return count_matrix(analyze_corpus(corpus), vocab);
}

}  // namespace concierge
