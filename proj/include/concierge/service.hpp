#pragma once

// Session-based voting and recommendation API over a fitted model. Handlers
// return plain Response values; http.hpp binds them to an HTTP server.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "concierge/errors.hpp"
#include "concierge/pipeline.hpp"
#include "concierge/recommend.hpp"

namespace concierge {

struct Response {
  int status = 200;
  nlohmann::ordered_json body;
  std::map<std::string, std::string> headers;
};

struct ServiceOptions {
  std::chrono::seconds session_ttl{24 * 3600};
  std::size_t max_page_size = 500;
  std::size_t default_page_size = 20;
  std::size_t max_k = 1000;
  std::string cors_origin;  // empty disables CORS headers
};

class Service {
 public:
  using Clock = std::chrono::steady_clock;

  explicit Service(std::shared_ptr<const FittedModel> model, ServiceOptions options = {},
                   std::function<Clock::time_point()> now = Clock::now)
      : model_(std::move(model)), options_(std::move(options)), now_(std::move(now)) {}

  const FittedModel& model() const { return *model_; }
  const ServiceOptions& options() const { return options_; }

  Response health() const {
    return {200,
            {{"status", "ok"},
             {"documents", model_->corpus->size()},
             {"scheme", std::string(to_string(model_->config.scheme))},
             {"dimensions", model_->embedding.dim()},
             {"fingerprint", model_->fingerprint}},
            {}};
  }

  /// Title substring filter (ASCII case-insensitive), 1-based pages.
  Response list_documents(const std::string& query, const std::string& page_text, const std::string& size_text) const {
    const auto page = parse_positive(page_text, 1);
    const auto size = parse_positive(size_text, options_.default_page_size);
    if (!page) return error(400, "bad_pagination", "page must be a positive integer");
    if (!size || *size > options_.max_page_size)
      return error(400, "bad_pagination",
                   "page_size must be an integer in [1, " + std::to_string(options_.max_page_size) + "]");
    const std::string needle = lower(query);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < model_->corpus->size(); ++i)
      if (needle.empty() || lower((*model_->corpus)[i].title).find(needle) != std::string::npos) hits.push_back(i);
    auto docs = nlohmann::ordered_json::array();
    const std::size_t first = (*page - 1) * *size;
    for (std::size_t i = first; i < hits.size() && i < first + *size; ++i) docs.push_back(summary(hits[i]));
    return {200, {{"page", *page}, {"page_size", *size}, {"total", hits.size()}, {"documents", std::move(docs)}}, {}};
  }

  Response get_document(const std::string& id) const {
    const auto o = model_->corpus->find(id);
    if (!o) return error(404, "unknown_document", "unknown document id '" + id + "'");
    return {200, document_to_json((*model_->corpus)[*o]), {}};
  }

  /// Optional body {"alpha": x, "beta": y} overrides the model's Rocchio parameters.
  Response create_session(const std::string& body = {}) {
    RocchioParams params = model_->config.rocchio;
    if (!body.empty()) {
      try {
        const auto j = nlohmann::json::parse(body);
        if (!j.is_object()) return error(400, "bad_request", "body must be a JSON object");
        if (j.contains("alpha")) params.alpha = j.at("alpha").get<double>();
        if (j.contains("beta")) params.beta = j.at("beta").get<double>();
        params.validate();
      } catch (const nlohmann::json::exception& e) {
        return error(400, "bad_request", std::string("invalid session body: ") + e.what());
      } catch (const InvalidArgument& e) {
        return error(400, "bad_request", e.what());
      }
    }
    auto s = std::make_shared<Session>();
    s->params = params;
    s->created = s->updated = now_();
    std::string id;
    {
      std::lock_guard lock(sessions_mutex_);
      purge_expired_locked();
      do id = new_session_id();
      while (sessions_.count(id));
      sessions_.emplace(id, s);
    }
    return {201, {{"session_id", id}, {"alpha", params.alpha}, {"beta", params.beta}}, {}};
  }

  Response get_session(const std::string& id) {
    auto s = find_session(id);
    if (!s) return unknown_session(id);
    std::lock_guard lock(s->mutex);
    s->updated = now_();
    return {200, session_json(id, *s), {}};
  }

  /// Body {"document_id": str, "relevance": "relevant" | "nonrelevant" | "clear"}.
  Response vote(const std::string& id, const std::string& body) {
    auto s = find_session(id);
    if (!s) return unknown_session(id);
    std::string doc;
    Relevance rel;
    try {
      const auto j = nlohmann::json::parse(body);
      doc = j.at("document_id").get<std::string>();
      rel = parse_relevance(j.at("relevance").get<std::string>());
    } catch (const nlohmann::json::exception&) {
      return error(400, "bad_request", "body must be {\"document_id\": str, \"relevance\": relevant|nonrelevant|clear}");
    } catch (const InvalidArgument& e) {
      return error(400, "bad_request", e.what());
    }
    if (!model_->corpus->find(doc)) return error(404, "unknown_document", "unknown document id '" + doc + "'");
    std::lock_guard lock(s->mutex);
    s->votes.vote(doc, rel);
    s->updated = now_();
    return {200, session_json(id, *s), {}};
  }

  Response recommendations(const std::string& id, const std::string& k_text = {}) {
    auto s = find_session(id);
    if (!s) return unknown_session(id);
    const auto k = parse_positive(k_text, model_->config.k);
    if (!k || *k > options_.max_k)
      return error(400, "bad_request", "k must be an integer in [1, " + std::to_string(options_.max_k) + "]");
    VoteSet votes;
    RocchioParams params;
    {
      std::lock_guard lock(s->mutex);
      s->updated = now_();
      votes = s->votes;
      params = s->params;
    }
    if (votes.relevant().empty())
      return error(409, "no_relevant_votes", "no relevant votes yet; vote at least one document relevant");
    const auto t0 = std::chrono::steady_clock::now();
    const auto list = model_->recommend(votes, params, *k);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    auto items = nlohmann::ordered_json::array();
    for (const auto& r : list.items) {
      auto j = summary(r.ordinal);
      j["distance"] = r.distance;
      items.push_back(std::move(j));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return {200, {{"session_id", id}, {"k", *k}, {"recommendations", std::move(items)}}, {{"X-Compute-Millis", buf}}};
  }

  std::size_t session_count() {
    std::lock_guard lock(sessions_mutex_);
    purge_expired_locked();
    return sessions_.size();
  }

  nlohmann::ordered_json snapshot() {
    std::lock_guard lock(sessions_mutex_);
    auto out = nlohmann::ordered_json::array();
    std::map<std::string, std::shared_ptr<Session>> sorted(sessions_.begin(), sessions_.end());
    for (const auto& [id, s] : sorted) {
      std::lock_guard slock(s->mutex);
      auto j = session_json(id, *s);
      j["alpha"] = s->params.alpha;
      j["beta"] = s->params.beta;
      out.push_back(std::move(j));
    }
    return {{"fingerprint", model_->fingerprint}, {"sessions", std::move(out)}};
  }

  /// Restores sessions from snapshot(); votes naming unknown documents are dropped.
  void restore(const nlohmann::json& snap) {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& j : snap.at("sessions")) {
      auto s = std::make_shared<Session>();
      s->params = model_->config.rocchio;
      if (j.contains("alpha")) s->params.alpha = j.at("alpha").get<double>();
      if (j.contains("beta")) s->params.beta = j.at("beta").get<double>();
      for (const auto& d : j.at("relevant"))
        if (model_->corpus->find(d.get<std::string>())) s->votes.vote(d.get<std::string>(), Relevance::relevant);
      for (const auto& d : j.at("nonrelevant"))
        if (model_->corpus->find(d.get<std::string>())) s->votes.vote(d.get<std::string>(), Relevance::nonrelevant);
      s->created = s->updated = now_();
      sessions_[j.at("session_id").get<std::string>()] = std::move(s);
    }
  }

  void save_snapshot(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write session snapshot '" + path + "'");
    out << snapshot().dump(2) << '\n';
  }

  void load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot read session snapshot '" + path + "'");
    try {
      restore(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("session snapshot '" + path + "' is invalid: " + e.what());
    }
  }

  static Response error(int status, const std::string& code, const std::string& message) {
    return {status, {{"error", {{"code", code}, {"message", message}}}}, {}};
  }

 private:
  struct Session {
    std::mutex mutex;
    VoteSet votes;
    RocchioParams params;
    Clock::time_point created, updated;
  };

  static std::optional<std::size_t> parse_positive(const std::string& text, std::size_t fallback) {
    if (text.empty()) return fallback;
    if (text.size() > 9 || !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }))
      return std::nullopt;
    const auto v = std::stoul(text);
    if (v == 0) return std::nullopt;
    return v;
  }

  static std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  static std::string new_session_id() {
    static thread_local std::random_device device;
    std::string id;
    static constexpr char hex[] = "0123456789abcdef";
    for (int word = 0; word < 4; ++word) {
      std::uint32_t v = device();
      for (int i = 0; i < 8; ++i, v >>= 4) id += hex[v & 0xf];
    }
    return id;
  }

  nlohmann::ordered_json summary(std::size_t ordinal) const {
    const auto& d = (*model_->corpus)[ordinal];
    return {{"id", d.id}, {"title", d.title}, {"topic", d.topic ? nlohmann::ordered_json(d.topic->str()) : nullptr}};
  }

  static nlohmann::ordered_json session_json(const std::string& id, const Session& s) {
    return {{"session_id", id},
            {"relevant", s.votes.relevant()},
            {"nonrelevant", s.votes.nonrelevant()},
            {"relevant_count", s.votes.relevant().size()},
            {"nonrelevant_count", s.votes.nonrelevant().size()}};
  }

  static Response unknown_session(const std::string& id) {
    return error(404, "unknown_session", "unknown session id '" + id + "'");
  }

  std::shared_ptr<Session> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    purge_expired_locked();
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  // Sweeps at most once a minute.
  void purge_expired_locked() {
    const auto now = now_();
    if (last_purge_ && now - *last_purge_ < std::chrono::minutes(1)) return;
    last_purge_ = now;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      Clock::time_point updated;
      {
        std::lock_guard slock(it->second->mutex);
        updated = it->second->updated;
      }
      if (now - updated > options_.session_ttl) it = sessions_.erase(it);
      else ++it;
    }
  }

  std::shared_ptr<const FittedModel> model_;
  ServiceOptions options_;
  std::function<Clock::time_point()> now_;
  std::mutex sessions_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::optional<Clock::time_point> last_purge_;
};

}  // namespace concierge
