#pragma once

// Documents, hierarchical topic codes, corpus ingest and the planted-topic
// synthetic corpus generator.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "concierge/errors.hpp"
#include "concierge/random.hpp"

namespace concierge {

/// Three-level topic label such as F.01.r (area, subarea, subdivision).
struct TopicCode {
  char area = 'A';
  std::string subarea = "01";
  char subdivision = 'a';

  std::string str() const { return std::string(1, area) + '.' + subarea + '.' + subdivision; }
  std::string area_key() const { return std::string(1, area); }
  std::string subarea_key() const { return std::string(1, area) + '.' + subarea; }

  friend bool operator==(const TopicCode&, const TopicCode&) = default;
  friend auto operator<=>(const TopicCode&, const TopicCode&) = default;
};

/// Strict parser for "A.BB.c". Case-sensitive; each component must be alphanumeric.
inline TopicCode parse_topic_code(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = text.find('.', start);
    parts.push_back(text.substr(start, dot == std::string_view::npos ? std::string_view::npos
                                                                     : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  const std::string quoted = "topic code '" + std::string(text) + "'";
  if (parts.size() != 3) {
    throw ParseError(quoted + ": expected 3 dot-separated levels (area.subarea.subdivision), got " +
                     std::to_string(parts.size()) +
                     (parts.size() == 2 ? " (missing subdivision)" : ""));
  }
  auto alnum = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) != 0; });
  };
  if (parts[0].empty()) throw ParseError(quoted + ": empty area");
  if (parts[0].size() != 1 || !std::isalpha(static_cast<unsigned char>(parts[0][0])))
    throw ParseError(quoted + ": area must be a single letter, got '" + std::string(parts[0]) + "'");
  if (parts[1].empty()) throw ParseError(quoted + ": empty subarea");
  if (parts[1].size() != 2 || !alnum(parts[1]))
    throw ParseError(quoted + ": subarea must be two alphanumeric characters, got '" +
                     std::string(parts[1]) + "'");
  if (parts[2].empty()) throw ParseError(quoted + ": empty subdivision");
  if (parts[2].size() != 1 || !alnum(parts[2]))
    throw ParseError(quoted + ": subdivision must be a single alphanumeric character, got '" +
                     std::string(parts[2]) + "'");
  return TopicCode{parts[0][0], std::string(parts[1]), parts[2][0]};
}

struct Document {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  std::optional<TopicCode> topic;
};

/// Ordered, immutable-after-construction collection with an id -> ordinal index.
class Corpus {
 public:
  Corpus() = default;

  explicit Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    index_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      const auto& d = docs_[i];
      if (d.id.empty()) throw LoadError("document at position " + std::to_string(i) + " has an empty id");
      if (d.abstract.empty() && d.keywords.empty())
        throw LoadError("document '" + d.id + "' has neither abstract nor keywords");
      if (!index_.emplace(d.id, i).second) throw LoadError("duplicate document id '" + d.id + "'");
    }
  }

  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  const std::vector<Document>& documents() const noexcept { return docs_; }
  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

  std::optional<std::size_t> find(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t ordinal(const std::string& id) const {
    if (auto o = find(id)) return *o;
    throw QueryError("unknown document id '" + id + "'");
  }

  bool fully_labeled() const {
    return std::all_of(docs_.begin(), docs_.end(), [](const Document& d) { return d.topic.has_value(); });
  }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// JSONL / CSV ingest

namespace detail {

inline std::string require_string(const nlohmann::json& row, const char* key, std::size_t line) {
  const auto it = row.find(key);
  if (it == row.end()) throw LoadError("line " + std::to_string(line) + ": missing required field '" + key + "'");
  if (!it->is_string())
    throw LoadError("line " + std::to_string(line) + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline std::optional<TopicCode> parse_optional_topic(const std::string& text, std::size_t line) {
  if (text.empty()) return std::nullopt;
  try {
    return parse_topic_code(text);
  } catch (const ParseError& e) {
    throw LoadError("line " + std::to_string(line) + ": " + e.what());
  }
}

inline Document document_from_json(const nlohmann::json& row, std::size_t line) {
  if (!row.is_object()) throw LoadError("line " + std::to_string(line) + ": expected a JSON object");
  Document d;
  d.id = require_string(row, "id", line);
  d.title = require_string(row, "title", line);
  d.abstract = require_string(row, "abstract", line);
  const auto kw = row.find("keywords");
  if (kw == row.end()) throw LoadError("line " + std::to_string(line) + ": missing required field 'keywords'");
  if (!kw->is_array()) throw LoadError("line " + std::to_string(line) + ": field 'keywords' must be an array");
  for (const auto& k : *kw) {
    if (!k.is_string()) throw LoadError("line " + std::to_string(line) + ": keywords must be strings");
    d.keywords.push_back(k.get<std::string>());
  }
  if (const auto t = row.find("topic"); t != row.end() && !t->is_null()) {
    if (!t->is_string()) throw LoadError("line " + std::to_string(line) + ": field 'topic' must be a string or null");
    d.topic = parse_optional_topic(t->get<std::string>(), line);
  }
  return d;
}

/// RFC 4180 records; quoted fields may contain commas, quotes ("") and newlines.
/// Each record carries the line number it started on.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false, any = false;
  std::size_t line = 1, record_line = 1;
  char c;
  auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    const bool blank = fields.size() == 1 && fields[0].empty() && !any;
    if (!blank) records.emplace_back(record_line, std::move(fields));
    fields.clear();
    any = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"': in_quotes = true; any = true; break;
      case ',': fields.push_back(std::move(field)); field.clear(); any = true; break;
      case '\r': break;
      case '\n':
        end_record();
        record_line = ++line;
        break;
      default: field += c; any = true;
    }
  }
  if (in_quotes) throw LoadError("line " + std::to_string(record_line) + ": unterminated quoted field");
  if (any || !field.empty()) end_record();
  return records;
}

}  // namespace detail

enum class CorpusFormat { jsonl, csv };

inline Corpus read_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) != 0; })) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw LoadError("line " + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    docs.push_back(detail::document_from_json(row, line));
  }
  return Corpus(std::move(docs));
}

/// CSV with a header naming id,title,abstract,keywords[,topic]; keywords are '|'-joined.
inline Corpus read_csv(std::istream& in) {
  auto records = detail::parse_csv(in);
  if (records.empty()) return Corpus{};
  const auto& header = records.front().second;
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::array<std::size_t, 4> cols{};
  const std::array<const char*, 4> required{"id", "title", "abstract", "keywords"};
  for (std::size_t i = 0; i < required.size(); ++i) {
    auto c = column(required[i]);
    if (!c) throw LoadError("line 1: header lacks required column '" + std::string(required[i]) + "'");
    cols[i] = *c;
  }
  const auto topic_col = column("topic");
  std::vector<Document> docs;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, row] = records[r];
    if (row.size() != header.size())
      throw LoadError("line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(row.size()));
    Document d;
    d.id = row[cols[0]];
    if (d.id.empty()) throw LoadError("line " + std::to_string(line) + ": missing required field 'id'");
    d.title = row[cols[1]];
    d.abstract = row[cols[2]];
    std::string_view kw = row[cols[3]];
    while (!kw.empty()) {
      const auto bar = kw.find('|');
      auto piece = kw.substr(0, bar);
      if (!piece.empty()) d.keywords.emplace_back(piece);
      if (bar == std::string_view::npos) break;
      kw.remove_prefix(bar + 1);
    }
    if (topic_col) d.topic = detail::parse_optional_topic(row[*topic_col], line);
    docs.push_back(std::move(d));
  }
  return Corpus(std::move(docs));
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::jsonl) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open corpus file '" + path + "'");
  return format == CorpusFormat::jsonl ? read_jsonl(in) : read_csv(in);
}

inline nlohmann::ordered_json document_to_json(const Document& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["title"] = d.title;
  j["abstract"] = d.abstract;
  j["keywords"] = d.keywords;
  j["topic"] = d.topic ? nlohmann::ordered_json(d.topic->str()) : nlohmann::ordered_json(nullptr);
  return j;
}

/// Canonical JSONL: fixed key order, one document per line, trailing newline.
inline std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus) {
    out += document_to_json(d).dump();
    out += '\n';
  }
  return out;
}

inline void write_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write corpus file '" + path + "'");
  out << to_jsonl(corpus);
}

/// 64-bit FNV-1a over the canonical JSONL, as 16 hex digits.
inline std::string corpus_fingerprint(const Corpus& corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_jsonl(corpus)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return s;
}

// ---------------------------------------------------------------------------
// Planted-topic synthetic corpus

struct SyntheticConfig {
  int n_areas = 7;
  int n_subareas_per_area = 4;
  int n_subdivisions_per_subarea = 3;
  int docs_per_leaf = 20;
  int vocab_per_node = 20;
  int doc_length = 80;
  int keywords_per_doc = 5;
  /// Probability that a token is drawn from the root / area / subarea / leaf vocabulary.
  std::array<double, 4> mixture{0.3, 0.25, 0.25, 0.2};
  std::uint64_t seed = 0;

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v < 1) throw InvalidArgument(std::string("synthetic config: ") + name + " must be >= 1");
    };
    positive(n_areas, "n_areas");
    positive(n_subareas_per_area, "n_subareas_per_area");
    positive(n_subdivisions_per_subarea, "n_subdivisions_per_subarea");
    positive(docs_per_leaf, "docs_per_leaf");
    positive(vocab_per_node, "vocab_per_node");
    positive(doc_length, "doc_length");
    positive(keywords_per_doc, "keywords_per_doc");
    if (n_areas > 26) throw InvalidArgument("synthetic config: at most 26 areas");
    if (n_subareas_per_area > 99) throw InvalidArgument("synthetic config: at most 99 subareas per area");
    if (n_subdivisions_per_subarea > 26) throw InvalidArgument("synthetic config: at most 26 subdivisions per subarea");
    if (keywords_per_doc > 4 * vocab_per_node)
      throw InvalidArgument("synthetic config: keywords_per_doc exceeds the leaf vocabulary");
    double sum = 0.0;
    for (double w : mixture) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("synthetic config: mixture weights must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("synthetic config: mixture weights must sum to 1");
    if (total_tokens() > token_capacity) throw InvalidArgument("synthetic config: vocabulary too large");
  }

  std::size_t n_leaves() const {
    return static_cast<std::size_t>(n_areas) * n_subareas_per_area * n_subdivisions_per_subarea;
  }
  std::size_t n_nodes() const {
    const std::size_t a = n_areas, s = a * n_subareas_per_area;
    return 1 + a + s + n_leaves();
  }
  std::size_t total_tokens() const { return n_nodes() * static_cast<std::size_t>(vocab_per_node); }

  static constexpr std::size_t token_capacity = 18ULL * 18 * 18 * 18 * 18;
};

inline SyntheticConfig synthetic_config_from_json(const nlohmann::json& j) {
  SyntheticConfig c;
  auto get_int = [&](const char* key, int& dst) {
    if (j.contains(key)) dst = j.at(key).get<int>();
  };
  get_int("n_areas", c.n_areas);
  get_int("n_subareas_per_area", c.n_subareas_per_area);
  get_int("n_subdivisions_per_subarea", c.n_subdivisions_per_subarea);
  get_int("docs_per_leaf", c.docs_per_leaf);
  get_int("vocab_per_node", c.vocab_per_node);
  get_int("doc_length", c.doc_length);
  get_int("keywords_per_doc", c.keywords_per_doc);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mixture")) {
    const auto& m = j.at("mixture");
    if (m.is_array()) {
      if (m.size() != 4) throw InvalidArgument("synthetic config: mixture needs 4 weights");
      for (std::size_t i = 0; i < 4; ++i) c.mixture[i] = m[i].get<double>();
    } else {
      c.mixture = {m.at("root").get<double>(), m.at("area").get<double>(), m.at("subarea").get<double>(),
                   m.at("leaf").get<double>()};
    }
  }
  c.validate();
  return c;
}

inline nlohmann::ordered_json synthetic_config_to_json(const SyntheticConfig& c) {
  nlohmann::ordered_json j;
  j["n_areas"] = c.n_areas;
  j["n_subareas_per_area"] = c.n_subareas_per_area;
  j["n_subdivisions_per_subarea"] = c.n_subdivisions_per_subarea;
  j["docs_per_leaf"] = c.docs_per_leaf;
  j["vocab_per_node"] = c.vocab_per_node;
  j["doc_length"] = c.doc_length;
  j["keywords_per_doc"] = c.keywords_per_doc;
  j["mixture"] = {{"root", c.mixture[0]}, {"area", c.mixture[1]}, {"subarea", c.mixture[2]}, {"leaf", c.mixture[3]}};
  j["seed"] = c.seed;
  return j;
}

namespace detail {

// Consonants only (no s, l, y): such tokens have Porter measure 0 and contain
// no stop word, so the text pipeline passes them through unchanged.
inline constexpr std::string_view synthetic_alphabet = "bcdfghjkmnpqrtvwxz";

inline std::string synthetic_token(std::size_t id) {
  std::string s(5, synthetic_alphabet[0]);
  for (int i = 4; i >= 0; --i, id /= synthetic_alphabet.size())
    s[static_cast<std::size_t>(i)] = synthetic_alphabet[id % synthetic_alphabet.size()];
  return s;
}

struct LeafPath {
  std::array<std::size_t, 4> nodes;  // root, area, subarea, leaf node ids
  TopicCode code;
};

inline LeafPath leaf_path(const SyntheticConfig& c, int area, int sub, int div) {
  const std::size_t A = c.n_areas, S = c.n_subareas_per_area, D = c.n_subdivisions_per_subarea;
  LeafPath p;
  p.nodes[0] = 0;
  p.nodes[1] = 1 + area;
  p.nodes[2] = 1 + A + area * S + sub;
  p.nodes[3] = 1 + A + A * S + (area * S + sub) * D + div;
  char buf[3];
  buf[0] = static_cast<char>('0' + (sub + 1) / 10);
  buf[1] = static_cast<char>('0' + (sub + 1) % 10);
  buf[2] = 0;
  p.code = TopicCode{static_cast<char>('A' + area), buf, static_cast<char>('a' + div)};
  return p;
}

inline std::vector<std::string> node_vocabulary(const SyntheticConfig& c, std::size_t node) {
  std::vector<std::string> v;
  for (int t = 0; t < c.vocab_per_node; ++t)
    v.push_back(synthetic_token(node * static_cast<std::size_t>(c.vocab_per_node) + static_cast<std::size_t>(t)));
  return v;
}

}  // namespace detail

/// All topic codes of the synthetic tree, in generation order.
inline std::vector<TopicCode> synthetic_leaves(const SyntheticConfig& c) {
  std::vector<TopicCode> out;
  for (int a = 0; a < c.n_areas; ++a)
    for (int s = 0; s < c.n_subareas_per_area; ++s)
      for (int d = 0; d < c.n_subdivisions_per_subarea; ++d) out.push_back(detail::leaf_path(c, a, s, d).code);
  return out;
}

/// Union of the node vocabularies on the root-to-leaf path (what the leaf's
/// documents and keywords are drawn from).
inline std::vector<std::string> synthetic_leaf_vocabulary(const SyntheticConfig& c, const TopicCode& leaf) {
  const int a = leaf.area - 'A';
  const int s = std::stoi(leaf.subarea) - 1;
  const int d = leaf.subdivision - 'a';
  if (a < 0 || a >= c.n_areas || s < 0 || s >= c.n_subareas_per_area || d < 0 || d >= c.n_subdivisions_per_subarea)
    throw InvalidArgument("topic " + leaf.str() + " is not part of the synthetic tree");
  std::vector<std::string> vocab;
  for (std::size_t node : detail::leaf_path(c, a, s, d).nodes) {
    auto v = detail::node_vocabulary(c, node);
    vocab.insert(vocab.end(), v.begin(), v.end());
  }
  return vocab;
}

inline Corpus generate_synthetic_corpus(const SyntheticConfig& c) {
  c.validate();
  Rng rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, 4> cumulative{};
  std::partial_sum(c.mixture.begin(), c.mixture.end(), cumulative.begin());

  std::vector<Document> docs;
  docs.reserve(c.n_leaves() * static_cast<std::size_t>(c.docs_per_leaf));
  const auto vpn = static_cast<std::size_t>(c.vocab_per_node);
  for (int a = 0; a < c.n_areas; ++a) {
    for (int s = 0; s < c.n_subareas_per_area; ++s) {
      for (int dv = 0; dv < c.n_subdivisions_per_subarea; ++dv) {
        const auto path = detail::leaf_path(c, a, s, dv);
        for (int i = 0; i < c.docs_per_leaf; ++i) {
          Document doc;
          std::string text;
          for (int t = 0; t < c.doc_length; ++t) {
            const double u = unit(rng);
            std::size_t level = 0;
            while (level < 3 && u >= cumulative[level]) ++level;
            const std::size_t id = path.nodes[level] * vpn + uniform_below(rng, vpn);
            if (!text.empty()) text += ' ';
            text += detail::synthetic_token(id);
          }
          // Keywords: distinct draws from the path vocabulary (partial Fisher-Yates).
          std::vector<std::size_t> pool(4 * vpn);
          for (std::size_t k = 0; k < pool.size(); ++k) pool[k] = path.nodes[k / vpn] * vpn + k % vpn;
          for (int k = 0; k < c.keywords_per_doc; ++k) {
            const std::size_t j = static_cast<std::size_t>(k) + uniform_below(rng, pool.size() - static_cast<std::size_t>(k));
            std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
            doc.keywords.push_back(detail::synthetic_token(pool[static_cast<std::size_t>(k)]));
          }
          char id[32];
          std::snprintf(id, sizeof id, "syn-%06zu", docs.size());
          doc.id = id;
          doc.title = path.code.str() + " synthetic abstract " + std::to_string(i + 1);
          doc.abstract = std::move(text);
          doc.topic = path.code;
          docs.push_back(std::move(doc));
        }
      }
    }
  }
  return Corpus(std::move(docs));
}

}  // namespace concierge
