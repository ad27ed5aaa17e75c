#pragma once

// Rocchio preference vectors from relevance votes, and nearest-document retrieval.

#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "concierge/balltree.hpp"
#include "concierge/corpus.hpp"
#include "concierge/embedding.hpp"
#include "concierge/errors.hpp"

namespace concierge {

enum class Relevance { relevant, nonrelevant, clear };

inline Relevance parse_relevance(std::string_view s) {
  if (s == "relevant") return Relevance::relevant;
  if (s == "nonrelevant") return Relevance::nonrelevant;
  if (s == "clear") return Relevance::clear;
  throw InvalidArgument("relevance must be relevant, nonrelevant or clear, got '" + std::string(s) + "'");
}

/// Disjoint relevant / non-relevant id sets. Voting an id moves it between sets.
class VoteSet {
 public:
  VoteSet() = default;
  VoteSet(std::set<std::string> relevant, std::set<std::string> nonrelevant)
      : relevant_(std::move(relevant)), nonrelevant_(std::move(nonrelevant)) {
    for (const auto& id : relevant_)
      if (nonrelevant_.count(id)) throw InvalidArgument("document '" + id + "' voted both relevant and non-relevant");
  }

  void vote(const std::string& id, Relevance r) {
    relevant_.erase(id);
    nonrelevant_.erase(id);
    if (r == Relevance::relevant) relevant_.insert(id);
    else if (r == Relevance::nonrelevant) nonrelevant_.insert(id);
  }

  const std::set<std::string>& relevant() const noexcept { return relevant_; }
  const std::set<std::string>& nonrelevant() const noexcept { return nonrelevant_; }
  bool empty() const noexcept { return relevant_.empty() && nonrelevant_.empty(); }

 private:
  std::set<std::string> relevant_;
  std::set<std::string> nonrelevant_;
};

struct RocchioParams {
  double alpha = 1.8;
  double beta = 0.0;
  /// Adds the corpus mean vector to q (the "mean article" initial query).
  bool center_on_corpus_mean = false;

  void validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidArgument("rocchio: alpha must be finite and >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw InvalidArgument("rocchio: beta must be finite and >= 0");
  }
};

/// q = alpha/N sum(r_i) - beta/M sum(u_j), the beta term omitted when M = 0.
inline Eigen::RowVectorXd rocchio_query(const std::vector<std::size_t>& relevant,
                                        const std::vector<std::size_t>& nonrelevant, const RocchioParams& p,
                                        const DocEmbedding& emb) {
  p.validate();
  if (relevant.empty()) throw QueryError("no relevant votes");
  const auto n = static_cast<std::size_t>(emb.size());
  Eigen::RowVectorXd sum_r = Eigen::RowVectorXd::Zero(emb.dim());
  for (auto o : relevant) {
    if (o >= n) throw QueryError("document ordinal " + std::to_string(o) + " out of range");
    sum_r += emb.vectors.row(static_cast<Eigen::Index>(o));
  }
  Eigen::RowVectorXd q = (p.alpha / static_cast<double>(relevant.size())) * sum_r;
  if (!nonrelevant.empty()) {
    Eigen::RowVectorXd sum_u = Eigen::RowVectorXd::Zero(emb.dim());
    for (auto o : nonrelevant) {
      if (o >= n) throw QueryError("document ordinal " + std::to_string(o) + " out of range");
      sum_u += emb.vectors.row(static_cast<Eigen::Index>(o));
    }
    q -= (p.beta / static_cast<double>(nonrelevant.size())) * sum_u;
  }
  if (p.center_on_corpus_mean) q += emb.vectors.colwise().mean();
  return q;
}

inline std::vector<std::size_t> ordinals_of(const std::set<std::string>& ids, const Corpus& corpus) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(corpus.ordinal(id));
  return out;
}

inline Eigen::RowVectorXd rocchio_query(const VoteSet& votes, const RocchioParams& p, const DocEmbedding& emb,
                                        const Corpus& corpus) {
  if (votes.relevant().empty()) throw QueryError("no relevant votes");
  return rocchio_query(ordinals_of(votes.relevant(), corpus), ordinals_of(votes.nonrelevant(), corpus), p, emb);
}

using NeighborIndex = BallTree;

inline NeighborIndex build_index(const DocEmbedding& emb, int leaf_size = 40, Metric metric = Metric::euclidean) {
  if (emb.size() == 0) throw InvalidArgument("cannot index an empty embedding");
  return NeighborIndex(emb.vectors, leaf_size, metric);
}

struct Recommendation {
  std::string id;
  std::size_t ordinal = 0;
  double distance = 0.0;
};

struct RecommendationList {
  std::vector<Recommendation> items;
  Eigen::RowVectorXd query;
};

inline RecommendationList nearest(const NeighborIndex& index, const Corpus& corpus, const Eigen::RowVectorXd& q,
                                  std::size_t k, const std::vector<std::size_t>& exclude = {}) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<bool> mask;
  if (!exclude.empty()) {
    mask.assign(index.size(), false);
    for (auto o : exclude)
      if (o < mask.size()) mask[o] = true;
  }
  RecommendationList out;
  out.query = q;
  for (const auto& n : index.query(q, k, mask)) out.items.push_back({corpus[n.ordinal].id, n.ordinal, n.distance});
  return out;
}

/// Rocchio query, then the k nearest documents that were not voted on.
inline RecommendationList recommend(const NeighborIndex& index, const DocEmbedding& emb, const Corpus& corpus,
                                    const VoteSet& votes, const RocchioParams& p = {}, std::size_t k = 10) {
  const auto rel = ordinals_of(votes.relevant(), corpus);
  const auto non = ordinals_of(votes.nonrelevant(), corpus);
  if (rel.empty()) throw QueryError("no relevant votes");
  auto exclude = rel;
  exclude.insert(exclude.end(), non.begin(), non.end());
  return nearest(index, corpus, rocchio_query(rel, non, p, emb), k, exclude);
}

inline RecommendationList recommend(const DocEmbedding& emb, const Corpus& corpus, const VoteSet& votes,
                                    const RocchioParams& p = {}, std::size_t k = 10) {
  return recommend(build_index(emb), emb, corpus, votes, p, k);
}

}  // namespace concierge
