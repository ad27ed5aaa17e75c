#pragma once

// Dense document vectors: LSA projections, averaged word vectors, and the
// keyword pseudo-document baseline.

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "concierge/corpus.hpp"
#include "concierge/errors.hpp"
#include "concierge/svd.hpp"
#include "concierge/textprep.hpp"
#include "concierge/weighting.hpp"

namespace concierge {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DocEmbedding {
  RowMatrix vectors;              // n x d
  std::string provenance;         // "lsa", "wordvec", "keywords-lsa", ...
  std::vector<bool> zero_rows;    // documents with no usable content

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

/// X_LSA = U_r S_r.
inline DocEmbedding embed_lsa(const LsaModel& m, std::string provenance = "lsa") {
  DocEmbedding e;
  e.vectors = m.U * m.S.asDiagonal();
  e.provenance = std::move(provenance);
  e.zero_rows.assign(static_cast<std::size_t>(e.vectors.rows()), false);
  for (Eigen::Index i = 0; i < e.vectors.rows(); ++i)
    e.zero_rows[static_cast<std::size_t>(i)] = e.vectors.row(i).squaredNorm() == 0.0;
  return e;
}

class WordVectorTable {
 public:
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  /// Zero until the first vector is added.
  Eigen::Index dim() const noexcept { return dim_; }

  void add(const std::string& token, const std::vector<double>& values) {
    if (empty()) dim_ = static_cast<Eigen::Index>(values.size());
    if (static_cast<Eigen::Index>(values.size()) != dim_)
      throw LoadError("word vectors: dimension " + std::to_string(values.size()) + " differs from " +
                      std::to_string(dim_));
    if (!index_.emplace(token, tokens_.size()).second) throw LoadError("word vectors: duplicate token '" + token + "'");
    tokens_.push_back(token);
    data_.insert(data_.end(), values.begin(), values.end());
  }

  const double* find(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? nullptr : data_.data() + it->second * static_cast<std::size_t>(dim_);
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
  Eigen::Index dim_ = 0;
};

/// Plain-text "token v1 ... vd" per line; blank lines are skipped.
inline WordVectorTable read_word_vectors(std::istream& in) {
  WordVectorTable table;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ss(text);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (ss >> field) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end != field.c_str() + field.size() || !std::isfinite(v))
        throw LoadError("line " + std::to_string(line) + ": invalid number '" + field + "'");
      values.push_back(v);
    }
    if (values.empty()) throw LoadError("line " + std::to_string(line) + ": token '" + token + "' has no values");
    try {
      table.add(token, values);
    } catch (const LoadError& e) {
      throw LoadError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return table;
}

inline WordVectorTable load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open word-vector file '" + path + "'");
  return read_word_vectors(in);
}

/// Mean of the table vectors of each document's stemmed abstract tokens.
/// Documents with no token in the table get the zero vector and a zero_rows flag.
inline DocEmbedding embed_wordvec(const Corpus& corpus, const WordVectorTable& table) {
  if (table.empty()) throw FitError("word vectors: table is empty");
  DocEmbedding e;
  e.provenance = "wordvec";
  e.vectors = RowMatrix::Zero(static_cast<Eigen::Index>(corpus.size()), table.dim());
  e.zero_rows.assign(corpus.size(), false);
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    std::size_t hits = 0;
    auto row = e.vectors.row(static_cast<Eigen::Index>(j));
    for (const auto& tok : tokenize(corpus[j].abstract)) {
      if (const double* v = table.find(tok)) {
        row += Eigen::Map<const Eigen::RowVectorXd>(v, table.dim());
        ++hits;
      }
    }
    if (hits == 0) e.zero_rows[j] = true;
    else row /= static_cast<double>(hits);
  }
  return e;
}

/// Lowercased, trimmed, internal whitespace collapsed.
inline std::string normalize_keyword(std::string_view k) {
  std::string out;
  bool space = false;
  for (char c : k) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

/// Each document's keywords as one pseudo-document of atomic terms.
inline std::vector<std::vector<std::string>> keyword_documents(const Corpus& corpus) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& d : corpus) {
    std::vector<std::string> terms;
    for (const auto& k : d.keywords)
      if (auto t = normalize_keyword(k); !t.empty()) terms.push_back(std::move(t));
    docs.push_back(std::move(terms));
  }
  return docs;
}

struct KeywordModel {
  Vocabulary vocabulary;
  LsaModel lsa;
  DocEmbedding embedding;
};

/// Keyword counts, unpruned, tf-idf weighted, then r-component LSA.
inline KeywordModel fit_keywords(const Corpus& corpus, int r = 30, const SvdOptions& opt = {}) {
  const auto docs = keyword_documents(corpus);
  if (std::all_of(docs.begin(), docs.end(), [](const auto& d) { return d.empty(); }))
    throw FitError("keywords: no document carries keywords");
  KeywordModel km;
  km.vocabulary = build_vocabulary(docs, 1, 1.0);
  const auto counts = count_matrix(docs, km.vocabulary);
  km.lsa = truncated_svd(weight_tfidf(counts).values, r, opt);
  km.embedding = embed_lsa(km.lsa, "keywords-lsa");
  for (std::size_t j = 0; j < docs.size(); ++j)
    if (docs[j].empty()) km.embedding.zero_rows[j] = true;
  return km;
}

inline DocEmbedding embed_keywords(const Corpus& corpus, int r = 30, const SvdOptions& opt = {}) {
  return fit_keywords(corpus, r, opt).embedding;
}

}  // namespace concierge
