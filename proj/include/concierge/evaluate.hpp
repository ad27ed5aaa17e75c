#pragma once

// Topic-tree distances, simulated voting users, parameter sweeps, scheme
// comparison and distance correlation, with CSV/JSON export.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <Eigen/Dense>

#include "json.hpp"

#include "concierge/balltree.hpp"
#include "concierge/corpus.hpp"
#include "concierge/embedding.hpp"
#include "concierge/errors.hpp"
#include "concierge/pipeline.hpp"
#include "concierge/random.hpp"
#include "concierge/recommend.hpp"

namespace concierge {

/// 3 - depth of the lowest common ancestor.
inline int topic_distance(const TopicCode& a, const TopicCode& b) {
  if (a.area != b.area) return 3;
  if (a.subarea != b.subarea) return 2;
  if (a.subdivision != b.subdivision) return 1;
  return 0;
}

inline double mean_suggestion_distance(const std::vector<std::size_t>& suggestions, const TopicCode& reference,
                                       const Corpus& corpus) {
  if (suggestions.empty()) throw StatsError("no suggestions to score");
  double sum = 0.0;
  for (auto o : suggestions) {
    const auto& d = corpus[o];
    if (!d.topic) throw StatsError("suggested document '" + d.id + "' has no topic");
    sum += topic_distance(*d.topic, reference);
  }
  return sum / static_cast<double>(suggestions.size());
}

inline double mean_suggestion_distance(const RecommendationList& list, const TopicCode& reference, const Corpus& corpus) {
  std::vector<std::size_t> o;
  for (const auto& r : list.items) o.push_back(r.ordinal);
  return mean_suggestion_distance(o, reference, corpus);
}

// ---------------------------------------------------------------------------
// Statistics

struct PairedT {
  double t = 0.0;
  long df = 0;
  double p = 1.0;
  double mean_diff = 0.0;
  bool degenerate = false;
};

/// Two-sided paired t test; zero difference variance sets the degenerate flag.
inline PairedT paired_t(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw StatsError("paired t: samples differ in length");
  if (x.size() < 2) throw StatsError("paired t: need at least 2 pairs");
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += x[i] - y[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
  PairedT r;
  r.df = static_cast<long>(x.size()) - 1;
  r.mean_diff = mean;
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    r.degenerate = true;
    r.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    r.p = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(static_cast<double>(r.df));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

/// (v - mean) / sd with the population standard deviation.
inline std::vector<double> zscore(const std::vector<double>& v) {
  if (v.size() < 2) throw StatsError("z-score: need at least 2 values");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  if (sd == 0.0) throw StatsError("z-score: zero standard deviation");
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back((x - mean) / sd);
  return out;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw StatsError("correlation: need two equal-length samples of size >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw StatsError("correlation undefined: a sample is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks, ties given their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
    i = j + 1;
  }
  return rank;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

struct MeanSe {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanSe mean_and_stderr(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  const double n = static_cast<double>(v.size());
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return r;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return r;
}

// ---------------------------------------------------------------------------
// Simulated users

struct SimulationConfig {
  std::size_t n_runs = 1000;
  std::size_t n_votes = 10;
  std::size_t k = 10;
  RocchioParams rocchio{};
  Metric metric = Metric::euclidean;
  int leaf_size = 40;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_runs < 1 || n_votes < 1 || k < 1) throw InvalidArgument("simulation: n_runs, n_votes and k must be >= 1");
    rocchio.validate();
  }
};

/// Returns the top-k suggestions for a run given its votes.
using Suggester = std::function<std::vector<std::size_t>(std::size_t run, const std::vector<std::size_t>& liked,
                                                         const std::vector<std::size_t>& disliked,
                                                         const std::vector<std::size_t>& exclude)>;

namespace detail {

inline constexpr std::uint64_t stream_seed_poster = 1;
inline constexpr std::uint64_t stream_random_order = 2;
inline constexpr std::uint64_t stream_dislike = 3;
inline constexpr std::uint64_t stream_pairs = 4;

inline std::vector<bool> exclusion_mask(std::size_t n, const std::vector<std::size_t>& exclude) {
  std::vector<bool> mask(n, false);
  for (auto o : exclude) mask[o] = true;
  return mask;
}

/// Labeled documents grouped by topic, in ordinal order.
struct TopicGroups {
  std::vector<std::size_t> labeled;
  std::map<TopicCode, std::vector<std::size_t>> by_topic;

  explicit TopicGroups(const Corpus& corpus) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!corpus[i].topic) throw StatsError("evaluation needs a fully labeled corpus; '" + corpus[i].id + "' has no topic");
      labeled.push_back(i);
      by_topic[*corpus[i].topic].push_back(i);
    }
    if (labeled.empty()) throw StatsError("evaluation needs a non-empty corpus");
  }
};

}  // namespace detail

inline Suggester embedding_suggester(const DocEmbedding& emb, const SimulationConfig& cfg) {
  auto index = std::make_shared<NeighborIndex>(emb.vectors, cfg.leaf_size, cfg.metric);
  return [index, &emb, cfg](std::size_t, const std::vector<std::size_t>& liked, const std::vector<std::size_t>& disliked,
                            const std::vector<std::size_t>& exclude) {
    const auto q = rocchio_query(liked, disliked, cfg.rocchio, emb);
    std::vector<std::size_t> out;
    for (const auto& n : index->query(q, cfg.k, detail::exclusion_mask(index->size(), exclude))) out.push_back(n.ordinal);
    return out;
  };
}

/// Each run gets one fixed random ordering of the corpus; suggestions are its
/// first k unvoted entries, whatever the votes say.
inline Suggester random_suggester(std::size_t n_docs, const SimulationConfig& cfg) {
  struct State {
    std::size_t run = static_cast<std::size_t>(-1);
    std::vector<std::size_t> order;
  };
  auto state = std::make_shared<State>();
  return [state, n_docs, cfg](std::size_t run, const std::vector<std::size_t>&, const std::vector<std::size_t>&,
                              const std::vector<std::size_t>& exclude) {
    if (state->run != run) {
      state->run = run;
      state->order.resize(n_docs);
      std::iota(state->order.begin(), state->order.end(), std::size_t{0});
      Rng rng = derive_rng(cfg.seed, run, detail::stream_random_order);
      for (std::size_t i = n_docs; i > 1; --i) std::swap(state->order[i - 1], state->order[uniform_below(rng, i)]);
    }
    const auto mask = detail::exclusion_mask(n_docs, exclude);
    std::vector<std::size_t> out;
    for (std::size_t o : state->order) {
      if (out.size() == cfg.k) break;
      if (!mask[o]) out.push_back(o);
    }
    return out;
  };
}

/// Per-run, per-vote-count distances plus their column summaries.
struct VoteCurve {
  std::size_t n_runs = 0;
  std::vector<std::vector<double>> runs;  // runs[run][vote - 1]
  std::vector<double> mean;
  std::vector<double> stderr_;

  std::vector<double> column(std::size_t vote) const {
    std::vector<double> c;
    c.reserve(runs.size());
    for (const auto& r : runs) c.push_back(r[vote]);
    return c;
  }

  std::vector<double> flattened() const {
    std::vector<double> v;
    for (const auto& r : runs) v.insert(v.end(), r.begin(), r.end());
    return v;
  }
};

/// Seed poster per run, uniform over labeled documents, redrawn (up to 100 times)
/// while its topic holds fewer than n_votes documents. Depends only on (seed, run).
inline std::size_t draw_seed_poster(const detail::TopicGroups& groups, const Corpus& corpus, std::size_t n_votes,
                                    Rng& rng) {
  for (int attempt = 0; attempt <= 100; ++attempt) {
    const auto o = groups.labeled[uniform_below(rng, groups.labeled.size())];
    if (groups.by_topic.at(*corpus[o].topic).size() >= n_votes) return o;
  }
  throw StatsError("no topic holds " + std::to_string(n_votes) + " documents for a vote sequence");
}

inline VoteCurve simulate_vote_sequence(const Suggester& suggest, const Corpus& corpus, const SimulationConfig& cfg) {
  cfg.validate();
  const detail::TopicGroups groups(corpus);
  VoteCurve curve;
  curve.n_runs = cfg.n_runs;
  curve.runs.assign(cfg.n_runs, std::vector<double>(cfg.n_votes, 0.0));
  for (std::size_t run = 0; run < cfg.n_runs; ++run) {
    Rng rng = derive_rng(cfg.seed, run, detail::stream_seed_poster);
    const auto seed_doc = draw_seed_poster(groups, corpus, cfg.n_votes, rng);
    const auto& topic = *corpus[seed_doc].topic;
    std::vector<std::size_t> pool = groups.by_topic.at(topic);
    pool.erase(std::find(pool.begin(), pool.end(), seed_doc));
    std::vector<std::size_t> liked{seed_doc};
    for (std::size_t v = 0; v < cfg.n_votes; ++v) {
      if (v > 0) {
        const auto pick = uniform_below(rng, pool.size());
        liked.push_back(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      const auto suggestions = suggest(run, liked, {}, liked);
      curve.runs[run][v] = suggestions.empty() ? 0.0 : mean_suggestion_distance(suggestions, topic, corpus);
    }
  }
  for (std::size_t v = 0; v < cfg.n_votes; ++v) {
    const auto s = mean_and_stderr(curve.column(v));
    curve.mean.push_back(s.mean);
    curve.stderr_.push_back(s.stderr_);
  }
  return curve;
}

inline VoteCurve simulate_vote_sequence(const DocEmbedding& emb, const Corpus& corpus, const SimulationConfig& cfg) {
  return simulate_vote_sequence(embedding_suggester(emb, cfg), corpus, cfg);
}

// ---------------------------------------------------------------------------
// Sweeps

struct ComponentCell {
  int components = 0;
  double mean_distance = 0.0;
  double stderr_ = 0.0;
  std::size_t n_runs = 0;
};

/// One single-vote simulation per component count; fit settings other than
/// the component count come from `fit_config`.
inline std::vector<ComponentCell> sweep_components(const Corpus& corpus, const std::vector<int>& grid,
                                                   SimulationConfig cfg, PipelineConfig fit_config = {}) {
  if (grid.empty()) throw InvalidArgument("component grid is empty");
  cfg.n_votes = 1;
  std::vector<ComponentCell> out;
  for (int r : grid) {
    fit_config.components = r;
    fit_config.keyword_components = r;
    const auto f = fit_embedding(corpus, fit_config);
    const auto curve = simulate_vote_sequence(f.embedding, corpus, cfg);
    out.push_back({r, curve.mean[0], curve.stderr_[0], cfg.n_runs});
  }
  return out;
}

struct RocchioCell {
  double alpha = 0.0;
  double beta = 0.0;
  int dislike_distance = 0;
  double mean_distance = 0.0;
  double stderr_ = 0.0;
  std::size_t n_runs = 0;
};

/// Each run likes one random poster and dislikes one random poster exactly
/// `dislike_distance` away from it. Suggestions exclude the liked poster only,
/// so the disliked draw cannot change a beta = 0 cell.
inline std::vector<RocchioCell> sweep_rocchio(const DocEmbedding& emb, const Corpus& corpus,
                                              const std::vector<double>& alpha_grid, const std::vector<double>& beta_grid,
                                              int dislike_distance, const SimulationConfig& cfg) {
  cfg.validate();
  if (alpha_grid.empty() || beta_grid.empty()) throw InvalidArgument("alpha and beta grids must be non-empty");
  if (dislike_distance < 1 || dislike_distance > 3) throw InvalidArgument("dislike distance must be 1, 2 or 3");
  const detail::TopicGroups groups(corpus);

  // Documents at each distance from each topic.
  std::map<TopicCode, std::vector<std::size_t>> at_distance;
  for (const auto& [topic, _] : groups.by_topic)
    for (const auto& [other, docs] : groups.by_topic)
      if (topic_distance(topic, other) == dislike_distance)
        at_distance[topic].insert(at_distance[topic].end(), docs.begin(), docs.end());
  if (at_distance.empty()) throw StatsError("no topic pair at distance " + std::to_string(dislike_distance));

  std::vector<std::size_t> liked(cfg.n_runs), disliked(cfg.n_runs);
  for (std::size_t run = 0; run < cfg.n_runs; ++run) {
    Rng rng = derive_rng(cfg.seed, run, detail::stream_seed_poster);
    bool found = false;
    for (int attempt = 0; attempt <= 100 && !found; ++attempt) {
      liked[run] = groups.labeled[uniform_below(rng, groups.labeled.size())];
      found = at_distance.count(*corpus[liked[run]].topic) != 0;
    }
    if (!found) throw StatsError("could not draw a poster with a partner at distance " + std::to_string(dislike_distance));
    const auto& partners = at_distance.at(*corpus[liked[run]].topic);
    Rng drng = derive_rng(cfg.seed, run, detail::stream_dislike);
    disliked[run] = partners[uniform_below(drng, partners.size())];
  }

  const NeighborIndex index(emb.vectors, cfg.leaf_size, cfg.metric);
  std::vector<RocchioCell> out;
  for (double a : alpha_grid) {
    for (double b : beta_grid) {
      RocchioParams p = cfg.rocchio;
      p.alpha = a;
      p.beta = b;
      std::vector<double> d(cfg.n_runs);
      for (std::size_t run = 0; run < cfg.n_runs; ++run) {
        const auto q = rocchio_query({liked[run]}, {disliked[run]}, p, emb);
        std::vector<std::size_t> s;
        for (const auto& n : index.query(q, cfg.k, detail::exclusion_mask(index.size(), {liked[run]})))
          s.push_back(n.ordinal);
        d[run] = mean_suggestion_distance(s, *corpus[liked[run]].topic, corpus);
      }
      const auto ms = mean_and_stderr(d);
      out.push_back({a, b, dislike_distance, ms.mean, ms.stderr_, cfg.n_runs});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scheme comparison

struct SchemeSpec {
  std::string name;  // "random" or a pipeline scheme name
  PipelineConfig fit;
};

struct PairwiseT {
  std::string a, b;
  PairedT stats;
};

struct SchemeComparison {
  std::vector<std::string> schemes;
  std::vector<VoteCurve> curves;
  std::vector<PairwiseT> pairs;  // pooled over all run x vote samples
};

/// Same seed posters and vote orders for every scheme, so samples pair by (run, vote).
inline SchemeComparison compare_schemes(const Corpus& corpus, const std::vector<SchemeSpec>& schemes,
                                        const SimulationConfig& cfg) {
  if (schemes.size() < 2) throw InvalidArgument("compare needs at least 2 schemes");
  SchemeComparison out;
  for (const auto& s : schemes) {
    out.schemes.push_back(s.name);
    if (s.name == "random") {
      out.curves.push_back(simulate_vote_sequence(random_suggester(corpus.size(), cfg), corpus, cfg));
    } else {
      auto fc = s.fit;
      fc.scheme = parse_scheme(s.name);
      const auto f = fit_embedding(corpus, fc);
      out.curves.push_back(simulate_vote_sequence(f.embedding, corpus, cfg));
    }
  }
  for (std::size_t i = 0; i < schemes.size(); ++i)
    for (std::size_t j = i + 1; j < schemes.size(); ++j)
      out.pairs.push_back({out.schemes[i], out.schemes[j], paired_t(out.curves[i].flattened(), out.curves[j].flattened())});
  return out;
}

// ---------------------------------------------------------------------------
// Distance correlation

struct DistancePair {
  std::size_t a = 0, b = 0;
  int topic_distance = 0;
  double model_distance = 0.0;
  double model_z = 0.0;
};

struct CorrelationResult {
  double spearman = 0.0;
  double pearson = 0.0;
  std::size_t n_pairs = 0;
  std::vector<DistancePair> pairs;
};

/// Uniform random unordered pairs of distinct documents; euclidean distances.
inline CorrelationResult distance_correlation(const DocEmbedding& emb, const Corpus& corpus, std::size_t n_pairs,
                                              std::uint64_t seed = 0) {
  if (n_pairs < 2) throw InvalidArgument("distance correlation needs n_pairs >= 2");
  const detail::TopicGroups groups(corpus);
  if (corpus.size() < 2) throw StatsError("distance correlation needs at least 2 documents");
  Rng rng = derive_rng(seed, 0, detail::stream_pairs);
  CorrelationResult r;
  r.n_pairs = n_pairs;
  std::vector<double> human, model;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    std::size_t a = uniform_below(rng, corpus.size());
    std::size_t b = uniform_below(rng, corpus.size() - 1);
    if (b >= a) ++b;
    if (b < a) std::swap(a, b);
    DistancePair dp;
    dp.a = a;
    dp.b = b;
    dp.topic_distance = topic_distance(*corpus[a].topic, *corpus[b].topic);
    dp.model_distance = (emb.vectors.row(static_cast<Eigen::Index>(a)) - emb.vectors.row(static_cast<Eigen::Index>(b))).norm();
    human.push_back(dp.topic_distance);
    model.push_back(dp.model_distance);
    r.pairs.push_back(dp);
  }
  r.spearman = spearman(model, human);
  r.pearson = pearson(model, human);
  const auto z = zscore(model);
  for (std::size_t i = 0; i < z.size(); ++i) r.pairs[i].model_z = z[i];
  return r;
}

/// Indicator vector of a document's area, subarea and leaf; euclidean distance
/// is then sqrt(2 * topic distance).
inline DocEmbedding topic_path_embedding(const Corpus& corpus) {
  const detail::TopicGroups groups(corpus);
  std::map<std::string, Eigen::Index> column;
  for (const auto& d : corpus) {
    column.emplace("a:" + d.topic->area_key(), 0);
    column.emplace("s:" + d.topic->subarea_key(), 0);
    column.emplace("l:" + d.topic->str(), 0);
  }
  Eigen::Index c = 0;
  for (auto& [_, i] : column) i = c++;
  DocEmbedding e;
  e.provenance = "topic-onehot";
  e.vectors = RowMatrix::Zero(static_cast<Eigen::Index>(corpus.size()), c);
  e.zero_rows.assign(corpus.size(), false);
  for (std::size_t j = 0; j < corpus.size(); ++j) {
    const auto& t = *corpus[j].topic;
    const auto row = static_cast<Eigen::Index>(j);
    e.vectors(row, column.at("a:" + t.area_key())) = 1.0;
    e.vectors(row, column.at("s:" + t.subarea_key())) = 1.0;
    e.vectors(row, column.at("l:" + t.str())) = 1.0;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Export

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline std::string components_csv(const std::vector<ComponentCell>& cells) {
  std::string s = "component_count,mean_distance,stderr,n_runs\n";
  for (const auto& c : cells)
    s += std::to_string(c.components) + ',' + detail::num(c.mean_distance) + ',' + detail::num(c.stderr_) + ',' +
         std::to_string(c.n_runs) + '\n';
  return s;
}

inline nlohmann::ordered_json components_json(const std::vector<ComponentCell>& cells) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& c : cells)
    j.push_back({{"component_count", c.components}, {"mean_distance", c.mean_distance}, {"stderr", c.stderr_}, {"n_runs", c.n_runs}});
  return j;
}

inline std::string rocchio_csv(const std::vector<RocchioCell>& cells) {
  std::string s = "alpha,beta,dislike_distance,mean_distance,stderr,n_runs\n";
  for (const auto& c : cells)
    s += detail::num(c.alpha) + ',' + detail::num(c.beta) + ',' + std::to_string(c.dislike_distance) + ',' +
         detail::num(c.mean_distance) + ',' + detail::num(c.stderr_) + ',' + std::to_string(c.n_runs) + '\n';
  return s;
}

inline nlohmann::ordered_json rocchio_json(const std::vector<RocchioCell>& cells) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& c : cells)
    j.push_back({{"alpha", c.alpha}, {"beta", c.beta}, {"dislike_distance", c.dislike_distance},
                 {"mean_distance", c.mean_distance}, {"stderr", c.stderr_}, {"n_runs", c.n_runs}});
  return j;
}

inline std::string curves_csv(const std::vector<std::string>& names, const std::vector<VoteCurve>& curves) {
  std::string s = "scheme,n_votes,mean_distance,stderr,n_runs\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t v = 0; v < curves[i].mean.size(); ++v)
      s += names[i] + ',' + std::to_string(v + 1) + ',' + detail::num(curves[i].mean[v]) + ',' +
           detail::num(curves[i].stderr_[v]) + ',' + std::to_string(curves[i].n_runs) + '\n';
  return s;
}

inline std::string pairs_csv(const std::vector<PairwiseT>& pairs) {
  std::string s = "scheme_a,scheme_b,mean_diff,t,df,p,degenerate\n";
  for (const auto& p : pairs)
    s += p.a + ',' + p.b + ',' + detail::num(p.stats.mean_diff) + ',' + detail::num(p.stats.t) + ',' +
         std::to_string(p.stats.df) + ',' + detail::num(p.stats.p) + ',' + (p.stats.degenerate ? "1" : "0") + '\n';
  return s;
}

inline nlohmann::ordered_json comparison_json(const SchemeComparison& c) {
  nlohmann::ordered_json j;
  auto curves = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < c.schemes.size(); ++i)
    curves.push_back({{"scheme", c.schemes[i]}, {"mean_distance", c.curves[i].mean}, {"stderr", c.curves[i].stderr_},
                      {"n_runs", c.curves[i].n_runs}});
  j["curves"] = std::move(curves);
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : c.pairs)
    pairs.push_back({{"scheme_a", p.a}, {"scheme_b", p.b}, {"mean_diff", p.stats.mean_diff},
                     {"t", std::isfinite(p.stats.t) ? nlohmann::ordered_json(p.stats.t) : nlohmann::ordered_json(nullptr)},
                     {"df", p.stats.df}, {"p", p.stats.p}, {"degenerate", p.stats.degenerate}});
  j["paired_t"] = std::move(pairs);
  return j;
}

inline std::string correlation_csv(const CorrelationResult& r, const Corpus& corpus) {
  std::string s = "doc_a,doc_b,topic_distance,model_distance,model_z\n";
  for (const auto& p : r.pairs)
    s += corpus[p.a].id + ',' + corpus[p.b].id + ',' + std::to_string(p.topic_distance) + ',' +
         detail::num(p.model_distance) + ',' + detail::num(p.model_z) + '\n';
  return s;
}

inline nlohmann::ordered_json correlation_json(const CorrelationResult& r, const std::string& scheme) {
  return {{"scheme", scheme}, {"spearman", r.spearman}, {"pearson", r.pearson}, {"n_pairs", r.n_pairs}};
}

}  // namespace concierge
