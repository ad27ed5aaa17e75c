#pragma once

// Binds Service handlers to a cpp-httplib server.

#include <string>

// Before httplib: it pulls in <resolv.h>, whose _res macro breaks Eigen.
#include "concierge/service.hpp"

#include "httplib.h"

namespace concierge {

namespace detail {

inline void send(const Service& service, httplib::Response& res, const Response& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  if (!service.options().cors_origin.empty()) {
    res.set_header("Access-Control-Allow-Origin", service.options().cors_origin);
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Expose-Headers", "X-Compute-Millis");
  }
  res.set_content(r.body.dump(), "application/json");
}

template <class F>
void guarded(const Service& service, httplib::Response& res, F&& f) {
  try {
    send(service, res, f());
  } catch (const std::exception& e) {
    send(service, res, Service::error(500, "internal", e.what()));
  }
}

inline std::string param(const httplib::Request& req, const char* key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string();
}

}  // namespace detail

inline void register_routes(httplib::Server& server, Service& service) {
  using Req = httplib::Request;
  using Res = httplib::Response;
  server.Get("/health", [&](const Req&, Res& res) { detail::guarded(service, res, [&] { return service.health(); }); });
  server.Get("/documents", [&](const Req& req, Res& res) {
    detail::guarded(service, res, [&] {
      return service.list_documents(detail::param(req, "q"), detail::param(req, "page"), detail::param(req, "page_size"));
    });
  });
  server.Get(R"(/documents/([^/]+))", [&](const Req& req, Res& res) {
    detail::guarded(service, res, [&] { return service.get_document(req.matches[1]); });
  });
  server.Post("/sessions", [&](const Req& req, Res& res) {
    detail::guarded(service, res, [&] { return service.create_session(req.body); });
  });
  server.Get(R"(/sessions/([0-9a-f]+))", [&](const Req& req, Res& res) {
    detail::guarded(service, res, [&] { return service.get_session(req.matches[1]); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/votes)", [&](const Req& req, Res& res) {
    detail::guarded(service, res, [&] { return service.vote(req.matches[1], req.body); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/recommendations)", [&](const Req& req, Res& res) {
    detail::guarded(service, res, [&] { return service.recommendations(req.matches[1], detail::param(req, "k")); });
  });
  server.Options(R"(/.*)", [&](const Req&, Res& res) {
    detail::send(service, res, Response{204, nullptr, {}});
    res.body.clear();
  });
  server.set_error_handler([&](const Req&, Res& res) {
    if (res.body.empty()) detail::send(service, res, Service::error(res.status, "not_found", "no such endpoint"));
  });
}

}  // namespace concierge
