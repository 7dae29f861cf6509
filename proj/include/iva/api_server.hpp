#pragma once

#include "iva/triage.hpp"

#include <memory>
#include <optional>
#include <string>

namespace iva {

/// HTTP/JSON API over a TriageService, versioned under /api/v1:
///
///   GET  /api/v1/products?status=assigned|unassigned
///   POST /api/v1/inventory/import              multipart "file" (+ optional "source"), or raw CSV/JSON body
///   GET  /api/v1/products/{id}/candidates?limit=10
///   PUT  /api/v1/products/{id}/assignment      {"wfn": {...} | "uri": ... | "fs": ..., "source", "derived_from", "user"}
///   POST /api/v1/products/{id}/scan
///   GET  /api/v1/products/{id}/alerts?state=PENDING&grouped=true
///   POST /api/v1/alerts/decide                 {"alert_ids": [...] | "group_id": "...", "decision", "user"}
///   GET  /api/v1/reports/summary?vendor=&state=&since=&until=&status=
///   POST /api/v1/admin/rescan
///
/// Success bodies are {"api_version": 1, "data": ...}; failures are
/// {"api_version": 1, "error": {"code": "...", "message": "..."}} with a
/// matching HTTP status (400, 401, 404, 409, 422, 500, 503).
struct ApiOptions {
    /// When set, every request must carry "Authorization: Bearer <token>".
    std::optional<std::string> bearer_token;
    /// Recorded as assigned_by / decided_by when a request names no user.
    std::string default_user = "api";
};

inline constexpr int kApiVersion = 1;

class ApiServer {
public:
    explicit ApiServer(TriageService& service, ApiOptions options = {});
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Returns the bound port, or -1.
    int bind_to_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    bool listen_after_bind();
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace iva
