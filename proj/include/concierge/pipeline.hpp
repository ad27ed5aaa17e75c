#pragma once

// Fit lifecycle: preprocess, count, weight, embed, index; plus the model file.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "concierge/balltree.hpp"
#include "concierge/corpus.hpp"
#include "concierge/embedding.hpp"
#include "concierge/errors.hpp"
#include "concierge/recommend.hpp"
#include "concierge/svd.hpp"
#include "concierge/textprep.hpp"
#include "concierge/weighting.hpp"

namespace concierge {

enum class Scheme { tf, tfidf, logentropy, wordvec, keywords };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::tf: return "tf";
    case Scheme::tfidf: return "tfidf";
    case Scheme::logentropy: return "logentropy";
    case Scheme::wordvec: return "wordvec";
    case Scheme::keywords: return "keywords";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "tf") return Scheme::tf;
  if (s == "tfidf") return Scheme::tfidf;
  if (s == "logentropy") return Scheme::logentropy;
  if (s == "wordvec") return Scheme::wordvec;
  if (s == "keywords") return Scheme::keywords;
  throw InvalidArgument("unknown scheme '" + std::string(s) + "' (expected tf, tfidf, logentropy, wordvec or keywords)");
}

struct PipelineConfig {
  Scheme scheme = Scheme::tfidf;
  int components = 150;
  int keyword_components = 30;
  std::size_t min_count = 3;
  double max_df_ratio = 0.8;
  std::uint64_t seed = 0;
  int leaf_size = 40;
  Metric metric = Metric::euclidean;
  RocchioParams rocchio{};
  std::size_t k = 10;
  std::string word_vectors;  // path, wordvec scheme only
  std::int64_t fit_timestamp = 0;

  void validate() const {
    if (components < 1) throw InvalidArgument("components must be >= 1");
    if (keyword_components < 1) throw InvalidArgument("keyword_components must be >= 1");
    if (!(max_df_ratio > 0.0 && max_df_ratio <= 1.0)) throw InvalidArgument("max_df_ratio must be in (0, 1]");
    if (leaf_size < 1) throw InvalidArgument("leaf_size must be >= 1");
    if (k < 1) throw InvalidArgument("k must be >= 1");
    rocchio.validate();
    if (scheme == Scheme::wordvec && word_vectors.empty())
      throw InvalidArgument("scheme wordvec needs a word-vector file");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["scheme"] = std::string(to_string(scheme));
    j["components"] = components;
    j["keyword_components"] = keyword_components;
    j["min_count"] = min_count;
    j["max_df_ratio"] = max_df_ratio;
    j["seed"] = seed;
    j["leaf_size"] = leaf_size;
    j["metric"] = std::string(to_string(metric));
    j["alpha"] = rocchio.alpha;
    j["beta"] = rocchio.beta;
    j["center_on_corpus_mean"] = rocchio.center_on_corpus_mean;
    j["k"] = k;
    j["word_vectors"] = word_vectors;
    j["fit_timestamp"] = fit_timestamp;
    return j;
  }

  /// Missing keys keep their defaults.
  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    if (j.contains("scheme")) c.scheme = parse_scheme(j.at("scheme").get<std::string>());
    if (j.contains("components")) c.components = j.at("components").get<int>();
    if (j.contains("keyword_components")) c.keyword_components = j.at("keyword_components").get<int>();
    if (j.contains("min_count")) c.min_count = j.at("min_count").get<std::size_t>();
    if (j.contains("max_df_ratio")) c.max_df_ratio = j.at("max_df_ratio").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("leaf_size")) c.leaf_size = j.at("leaf_size").get<int>();
    if (j.contains("metric")) c.metric = parse_metric(j.at("metric").get<std::string>());
    if (j.contains("alpha")) c.rocchio.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) c.rocchio.beta = j.at("beta").get<double>();
    if (j.contains("center_on_corpus_mean")) c.rocchio.center_on_corpus_mean = j.at("center_on_corpus_mean").get<bool>();
    if (j.contains("k")) c.k = j.at("k").get<std::size_t>();
    if (j.contains("word_vectors")) c.word_vectors = j.at("word_vectors").get<std::string>();
    if (j.contains("fit_timestamp")) c.fit_timestamp = j.at("fit_timestamp").get<std::int64_t>();
    return c;
  }
};

struct FittedModel {
  PipelineConfig config;
  std::shared_ptr<const Corpus> corpus;
  std::string fingerprint;
  Vocabulary vocabulary;
  std::optional<GlobalWeights> global_weights;
  std::optional<LsaModel> lsa;
  DocEmbedding embedding;
  std::shared_ptr<const NeighborIndex> index;

  RecommendationList recommend(const VoteSet& votes, std::optional<RocchioParams> params = std::nullopt,
                               std::optional<std::size_t> k = std::nullopt) const {
    return concierge::recommend(*index, embedding, *corpus, votes, params.value_or(config.rocchio),
                                k.value_or(config.k));
  }
};

struct EmbeddingFit {
  Vocabulary vocabulary;
  std::optional<GlobalWeights> global_weights;
  std::optional<LsaModel> lsa;
  DocEmbedding embedding;
};

/// Everything up to (not including) the index; each failure names its stage.
inline EmbeddingFit fit_embedding(const Corpus& corpus, const PipelineConfig& config) {
  config.validate();
  if (corpus.empty()) throw FitError("fit: corpus is empty");
  EmbeddingFit f;
  const SvdOptions svd{.seed = config.seed};
  if (config.scheme == Scheme::keywords) {
    auto km = fit_keywords(corpus, config.keyword_components, svd);
    f.vocabulary = std::move(km.vocabulary);
    f.lsa = std::move(km.lsa);
    f.embedding = std::move(km.embedding);
    return f;
  }
  if (config.scheme == Scheme::wordvec) {
    f.embedding = embed_wordvec(corpus, load_word_vectors(config.word_vectors));
    return f;
  }
  const auto docs = analyze_corpus(corpus);
  f.vocabulary = build_vocabulary(docs, config.min_count, config.max_df_ratio);
  if (f.vocabulary.empty()) throw FitError("fit: vocabulary is empty after pruning");
  const auto counts = count_matrix(docs, f.vocabulary);
  WeightedMatrix w;
  switch (config.scheme) {
    case Scheme::tf: w = weight_tf(counts); break;
    case Scheme::tfidf: w = weight_tfidf(counts); break;
    default:
      f.global_weights = fit_global_entropy(counts);
      w = weight_logentropy(counts, *f.global_weights);
  }
  const auto limit = std::min<Eigen::Index>(w.values.rows(), w.values.cols());
  if (config.components > limit)
    throw FitError("fit: " + std::to_string(config.components) + " components requested but the matrix is " +
                   std::to_string(w.values.rows()) + " x " + std::to_string(w.values.cols()));
  f.lsa = truncated_svd(w.values, config.components, svd);
  f.embedding = embed_lsa(*f.lsa);
  for (std::size_t j = 0; j < corpus.size(); ++j)
    if (counts.counts.row(static_cast<Eigen::Index>(j)).nonZeros() == 0) f.embedding.zero_rows[j] = true;
  return f;
}

inline FittedModel fit(Corpus corpus, const PipelineConfig& config) {
  auto f = fit_embedding(corpus, config);
  FittedModel m;
  m.config = config;
  m.fingerprint = corpus_fingerprint(corpus);
  m.corpus = std::make_shared<const Corpus>(std::move(corpus));
  m.vocabulary = std::move(f.vocabulary);
  m.global_weights = std::move(f.global_weights);
  m.lsa = std::move(f.lsa);
  m.embedding = std::move(f.embedding);
  m.index = std::make_shared<const NeighborIndex>(build_index(m.embedding, config.leaf_size, config.metric));
  return m;
}

// ---------------------------------------------------------------------------
// Model file: magic, u32 version, u64 header length, JSON header, then
// little-endian float64 arrays in header order.

inline constexpr std::string_view model_magic = "CONCIERGEMODEL\n";
inline constexpr std::uint32_t model_version = 1;

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

inline void put_doubles(std::string& out, const double* p, std::size_t n) {
  out.append(reinterpret_cast<const char*>(p), n * sizeof(double));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw LoadError("model file is truncated or corrupted");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  template <class T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  void doubles(double* dst, std::size_t n) {
    if (n > (data_.size() - pos_) / sizeof(double)) throw LoadError("model file is truncated or corrupted");
    std::memcpy(dst, take(n * sizeof(double)).data(), n * sizeof(double));
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

// Column-major storage for U and V, row-major for the embedding.
inline void put_matrix(std::string& out, const Eigen::MatrixXd& m) { put_doubles(out, m.data(), static_cast<std::size_t>(m.size())); }

}  // namespace detail

inline std::string serialize_model(const FittedModel& m) {
  nlohmann::ordered_json h;
  h["format"] = "concierge-model";
  h["config"] = m.config.to_json();
  h["fingerprint"] = m.fingerprint;
  h["fit_timestamp"] = m.config.fit_timestamp;
  h["n_documents"] = m.corpus->size();
  h["embedding"] = {{"rows", m.embedding.size()}, {"cols", m.embedding.dim()}, {"provenance", m.embedding.provenance}};
  std::vector<std::size_t> zero;
  for (std::size_t i = 0; i < m.embedding.zero_rows.size(); ++i)
    if (m.embedding.zero_rows[i]) zero.push_back(i);
  h["zero_rows"] = zero;
  h["vocabulary"] = m.vocabulary.to_json();
  if (m.lsa) {
    h["lsa"] = {{"r", m.lsa->r}, {"u_rows", m.lsa->U.rows()}, {"v_rows", m.lsa->V.rows()}};
  } else {
    h["lsa"] = nullptr;
  }
  h["global_weights"] = m.global_weights ? nlohmann::ordered_json(m.global_weights->g.size()) : nlohmann::ordered_json(nullptr);
  h["global_weights_n"] = m.global_weights ? m.global_weights->n : 0;
  h["corpus"] = to_jsonl(*m.corpus);
  const std::string header = h.dump();

  std::string out(model_magic);
  detail::put_le<std::uint32_t>(out, model_version);
  detail::put_le<std::uint64_t>(out, header.size());
  out += header;
  detail::put_doubles(out, m.embedding.vectors.data(), static_cast<std::size_t>(m.embedding.vectors.size()));
  if (m.lsa) {
    detail::put_doubles(out, m.lsa->S.data(), static_cast<std::size_t>(m.lsa->S.size()));
    detail::put_matrix(out, m.lsa->U);
    detail::put_matrix(out, m.lsa->V);
  }
  if (m.global_weights) detail::put_doubles(out, m.global_weights->g.data(), static_cast<std::size_t>(m.global_weights->g.size()));
  return out;
}

inline FittedModel deserialize_model(std::string_view data) {
  detail::Reader in(data);
  if (data.size() < model_magic.size() || in.take(model_magic.size()) != model_magic)
    throw LoadError("not a model file (bad magic string)");
  const auto version = in.get<std::uint32_t>();
  if (version != model_version)
    throw LoadError("unsupported model version " + std::to_string(version) + " (expected " + std::to_string(model_version) + ")");
  const auto header_len = in.get<std::uint64_t>();
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(in.take(static_cast<std::size_t>(header_len)));
  } catch (const nlohmann::json::exception&) {
    throw LoadError("model header is corrupted");
  }

  FittedModel m;
  try {
    m.config = PipelineConfig::from_json(h.at("config"));
    m.fingerprint = h.at("fingerprint").get<std::string>();
    std::istringstream corpus_text(h.at("corpus").get<std::string>());
    m.corpus = std::make_shared<const Corpus>(read_jsonl(corpus_text));
    m.vocabulary = Vocabulary::from_json(h.at("vocabulary"));
    const auto& e = h.at("embedding");
    const auto rows = e.at("rows").get<Eigen::Index>(), cols = e.at("cols").get<Eigen::Index>();
    if (rows != static_cast<Eigen::Index>(m.corpus->size())) throw LoadError("model embedding does not match its corpus");
    m.embedding.provenance = e.at("provenance").get<std::string>();
    m.embedding.vectors.resize(rows, cols);
    m.embedding.zero_rows.assign(static_cast<std::size_t>(rows), false);
    for (auto i : h.at("zero_rows").get<std::vector<std::size_t>>()) m.embedding.zero_rows.at(i) = true;
    in.doubles(m.embedding.vectors.data(), static_cast<std::size_t>(rows * cols));
    if (!h.at("lsa").is_null()) {
      const auto& l = h.at("lsa");
      LsaModel lsa;
      lsa.r = l.at("r").get<int>();
      lsa.S.resize(lsa.r);
      lsa.U.resize(l.at("u_rows").get<Eigen::Index>(), lsa.r);
      lsa.V.resize(l.at("v_rows").get<Eigen::Index>(), lsa.r);
      in.doubles(lsa.S.data(), static_cast<std::size_t>(lsa.S.size()));
      in.doubles(lsa.U.data(), static_cast<std::size_t>(lsa.U.size()));
      in.doubles(lsa.V.data(), static_cast<std::size_t>(lsa.V.size()));
      m.lsa = std::move(lsa);
    }
    if (!h.at("global_weights").is_null()) {
      GlobalWeights g;
      g.g.resize(h.at("global_weights").get<Eigen::Index>());
      g.n = h.at("global_weights_n").get<std::size_t>();
      in.doubles(g.g.data(), static_cast<std::size_t>(g.g.size()));
      m.global_weights = std::move(g);
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("model header is corrupted: ") + e.what());
  } catch (const std::out_of_range&) {
    throw LoadError("model header is corrupted");
  }
  if (!in.done()) throw LoadError("model file has trailing bytes");
  if (corpus_fingerprint(*m.corpus) != m.fingerprint) throw LoadError("model corpus does not match its fingerprint");
  m.index = std::make_shared<const NeighborIndex>(build_index(m.embedding, m.config.leaf_size, m.config.metric));
  return m;
}

inline void save_model(const FittedModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write model file '" + path + "'");
  const auto bytes = serialize_model(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("failed writing model file '" + path + "'");
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace concierge
