#pragma once

// tf, tf-idf and log-entropy term weighting over sparse count matrices.

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "concierge/errors.hpp"
#include "concierge/textprep.hpp"

namespace concierge {

enum class Weighting { tf, tfidf, logentropy };

inline std::string_view to_string(Weighting w) {
  switch (w) {
    case Weighting::tf: return "tf";
    case Weighting::tfidf: return "tfidf";
    case Weighting::logentropy: return "logentropy";
  }
  return "?";
}

struct WeightedMatrix {
  SparseMatrix values;
  Weighting scheme = Weighting::tf;
};

/// Per-term g_i in [0, 1].
struct GlobalWeights {
  Eigen::VectorXd g;
  std::size_t n = 0;
};

inline WeightedMatrix weight_tf(const TermDocMatrix& m) { return {m.counts, Weighting::tf}; }

/// (1 + ln f_ij) * ln(n / (f_i + 1)) on nonzero entries.
inline double tfidf_value(double f_ij, double f_i, double n) {
  return (1.0 + std::log(f_ij)) * std::log(n / (f_i + 1.0));
}

inline WeightedMatrix weight_tfidf(const TermDocMatrix& m) {
  if (m.df.size() != m.cols()) throw InvalidArgument("tfidf: document frequencies do not match the column count");
  WeightedMatrix out{m.counts, Weighting::tfidf};
  const double n = static_cast<double>(m.n);
  Eigen::VectorXd idf(m.cols());
  for (Eigen::Index i = 0; i < m.cols(); ++i) idf[i] = std::log(n / (m.df[i] + 1.0));
  for (Eigen::Index r = 0; r < out.values.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out.values, r); it; ++it)
      if (it.value() != 0.0) it.valueRef() = (1.0 + std::log(it.value())) * idf[it.col()];
  return out;
}

/// g_i = 1 + sum_j p_ij log2 p_ij / log2 n, with p_ij = f_ij / sum_j f_ij.
inline GlobalWeights fit_global_entropy(const TermDocMatrix& m) {
  if (m.n < 2) throw FitError("log-entropy: need at least 2 documents, got " + std::to_string(m.n));
  const Eigen::Index V = m.cols();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(V);
  for (Eigen::Index r = 0; r < m.counts.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m.counts, r); it; ++it) total[it.col()] += it.value();
  Eigen::VectorXd plogp = Eigen::VectorXd::Zero(V);
  for (Eigen::Index r = 0; r < m.counts.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m.counts, r); it; ++it) {
      if (it.value() == 0.0) continue;
      const double p = it.value() / total[it.col()];
      plogp[it.col()] += p * std::log2(p);
    }
  }
  GlobalWeights gw;
  gw.n = m.n;
  gw.g.resize(V);
  const double log2n = std::log2(static_cast<double>(m.n));
  for (Eigen::Index i = 0; i < V; ++i) {
    if (total[i] <= 0.0) throw FitError("log-entropy: term column " + std::to_string(i) + " has no occurrences");
    gw.g[i] = 1.0 + plogp[i] / log2n;
  }
  return gw;
}

/// log2(1 + f_ij) * g_i.
inline WeightedMatrix weight_logentropy(const TermDocMatrix& m, const GlobalWeights& g) {
  if (g.g.size() != m.cols())
    throw InvalidArgument("log-entropy: " + std::to_string(g.g.size()) + " global weights for " +
                          std::to_string(m.cols()) + " terms");
  WeightedMatrix out{m.counts, Weighting::logentropy};
  for (Eigen::Index r = 0; r < out.values.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out.values, r); it; ++it)
      it.valueRef() = std::log2(1.0 + it.value()) * g.g[it.col()];
  return out;
}

}  // namespace concierge
