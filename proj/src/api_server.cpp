#include "iva/api_server.hpp"

#include "iva/json_io.hpp"

#include "httplib.h"

#include <spdlog/spdlog.h>

namespace iva {

using nlohmann::json;

namespace {

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

void send(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message)
{
    send(res, status, json{{"api_version", kApiVersion}, {"error", {{"code", code}, {"message", message}}}});
}

template <class Fn>
void handle(httplib::Response& res, Fn&& fn)
{
    try {
        send(res, 200, json{{"api_version", kApiVersion}, {"data", fn()}});
    } catch (const HttpError& e) {
        send_error(res, e.status, e.code, e.message);
    } catch (const UnknownProduct& e) {
        send_error(res, 404, "UNKNOWN_PRODUCT", e.what());
    } catch (const UnknownAlert& e) {
        send_error(res, 404, "UNKNOWN_ALERT", e.what());
    } catch (const Unassigned& e) {
        send_error(res, 409, "UNASSIGNED", e.what());
    } catch (const AlreadyDecided& e) {
        send_error(res, 409, "ALREADY_DECIDED", e.what());
    } catch (const NoSnapshot& e) {
        send_error(res, 503, "NO_SNAPSHOT", e.what());
    } catch (const EmptyFile& e) {
        send_error(res, 422, "EMPTY_FILE", e.what());
    } catch (const FormatError& e) {
        send_error(res, 422, "FORMAT_ERROR", e.what());
    } catch (const InvalidWfn& e) {
        send_error(res, 400, "INVALID_WFN", e.what());
    } catch (const MalformedUri& e) {
        send_error(res, 400, "INVALID_WFN", e.what());
    } catch (const MalformedFormattedString& e) {
        send_error(res, 400, "INVALID_WFN", e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "BAD_REQUEST", e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, "BAD_REQUEST", e.what());
    } catch (const std::out_of_range& e) {
        send_error(res, 400, "BAD_REQUEST", e.what());
    } catch (const std::exception& e) {
        spdlog::error("API request failed: {}", e.what());
        send_error(res, 500, "INTERNAL", e.what());
    }
}

json parse_body(const httplib::Request& req)
{
    if (req.body.empty()) return json::object();
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw HttpError{400, "BAD_REQUEST", "request body must be a JSON object"};
    return body;
}

std::int64_t path_id(const httplib::Request& req)
{
    return std::stoll(req.matches[1].str());
}

std::optional<std::string> param(const httplib::Request& req, const char* name)
{
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

std::optional<AlertState> state_param(const httplib::Request& req)
{
    auto s = param(req, "state");
    if (!s || s->empty()) return std::nullopt;
    auto state = parse_alert_state(*s);
    if (!state) throw HttpError{400, "BAD_REQUEST", "unknown alert state '" + *s + "'"};
    return state;
}

std::string user_of(const json& body, const ApiOptions& options)
{
    if (auto it = body.find("user"); it != body.end() && it->is_string() && !it->get<std::string>().empty()) {
        return it->get<std::string>();
    }
    return options.default_user;
}

} // namespace

struct ApiServer::Impl {
    TriageService& service;
    ApiOptions options;
    httplib::Server server;

    Impl(TriageService& s, ApiOptions o) : service(s), options(std::move(o)) { routes(); }

    void routes()
    {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (!options.bearer_token) return httplib::Server::HandlerResponse::Unhandled;
            if (req.get_header_value("Authorization") == "Bearer " + *options.bearer_token) {
                return httplib::Server::HandlerResponse::Unhandled;
            }
            send_error(res, 401, "UNAUTHORIZED", "missing or wrong bearer token");
            return httplib::Server::HandlerResponse::Handled;
        });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                send_error(res, res.status, res.status == 404 ? "NOT_FOUND" : "HTTP_ERROR", "no such endpoint");
            }
        });

        server.Get("/api/v1/products", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                auto status = param(req, "status");
                if (status && status->empty()) status.reset();
                if (status && *status != "assigned" && *status != "unassigned") {
                    throw HttpError{400, "BAD_REQUEST", "status must be 'assigned' or 'unassigned'"};
                }
                json arr = json::array();
                for (const auto& p : service.list_products(status)) arr.push_back(to_json(p));
                return arr;
            });
        });

        server.Post("/api/v1/inventory/import", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                std::string source = "api";
                std::string content;
                if (req.is_multipart_form_data()) {
                    if (!req.has_file("file")) throw HttpError{400, "BAD_REQUEST", "multipart field 'file' is required"};
                    content = req.get_file_value("file").content;
                    if (req.has_file("source")) source = req.get_file_value("source").content;
                } else {
                    content = req.body;
                    if (auto s = param(req, "source")) source = *s;
                }
                return to_json(service.import_inventory(content, source));
            });
        });

        server.Get(R"(/api/v1/products/(\d+)/candidates)", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                std::size_t limit = 10;
                if (auto l = param(req, "limit")) {
                    auto v = std::stoll(*l);
                    if (v < 0) throw HttpError{400, "BAD_REQUEST", "limit must be non-negative"};
                    limit = static_cast<std::size_t>(v);
                }
                return to_json(service.list_candidates(path_id(req), limit));
            });
        });

        server.Put(R"(/api/v1/products/(\d+)/assignment)", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                auto body = parse_body(req);
                Wfn wfn;
                if (body.contains("wfn")) {
                    wfn = wfn_from_json(body["wfn"]);
                } else if (body.contains("uri") || body.contains("fs")) {
                    wfn = wfn_from_json(body);
                } else {
                    throw HttpError{400, "BAD_REQUEST", "body needs 'wfn', 'uri' or 'fs'"};
                }
                auto source = AssignmentSource::candidate_selected;
                if (auto it = body.find("source"); it != body.end()) {
                    auto parsed = it->is_string() ? parse_assignment_source(it->get<std::string>()) : std::nullopt;
                    if (!parsed) throw HttpError{400, "BAD_REQUEST", "source must be CANDIDATE_SELECTED or USER_EDITED"};
                    source = *parsed;
                }
                std::optional<std::string> derived;
                if (auto it = body.find("derived_from"); it != body.end() && it->is_string()) derived = it->get<std::string>();
                return to_json(service.assign_cpe(path_id(req), wfn, source, user_of(body, options), derived));
            });
        });

        server.Post(R"(/api/v1/products/(\d+)/scan)", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return to_json(service.scan_product(path_id(req))); });
        });

        server.Get(R"(/api/v1/products/(\d+)/alerts)", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                auto state = state_param(req);
                json arr = json::array();
                if (param(req, "grouped") == "true") {
                    for (const auto& g : service.list_alert_groups(path_id(req), state)) arr.push_back(to_json(g));
                } else {
                    for (const auto& a : service.list_alerts(path_id(req), state)) arr.push_back(to_json(a));
                }
                return arr;
            });
        });

        server.Post("/api/v1/alerts/decide", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                auto body = parse_body(req);
                auto decision_text = body.value("decision", std::string{});
                auto decision = parse_alert_state(decision_text);
                if (!decision || *decision == AlertState::pending) {
                    throw HttpError{400, "BAD_REQUEST", "decision must be CONFIRMED or DISCARDED"};
                }
                auto user = user_of(body, options);
                std::vector<Alert> updated;
                if (body.contains("group_id")) {
                    updated = service.set_group_state(body["group_id"].get<std::string>(), *decision, user);
                } else if (body.contains("alert_ids")) {
                    updated = service.set_alert_state(body["alert_ids"].get<std::vector<std::int64_t>>(), *decision, user);
                } else {
                    throw HttpError{400, "BAD_REQUEST", "body needs 'alert_ids' or 'group_id'"};
                }
                json arr = json::array();
                for (const auto& a : updated) arr.push_back(to_json(a));
                return arr;
            });
        });

        server.Get("/api/v1/reports/summary", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] {
                ReportFilter f;
                f.vendor = param(req, "vendor");
                f.state = state_param(req);
                f.since = param(req, "since");
                f.until = param(req, "until");
                f.status = param(req, "status");
                for (auto* o : {&f.vendor, &f.since, &f.until, &f.status}) {
                    if (*o && (*o)->empty()) o->reset();
                }
                return to_json(service.report(f));
            });
        });

        server.Post("/api/v1/admin/rescan", [this](const httplib::Request&, httplib::Response& res) {
            handle(res, [&] { return to_json(service.scheduled_rescan()); });
        });
    }
};

ApiServer::ApiServer(TriageService& service, ApiOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options)))
{
}

ApiServer::~ApiServer() = default;

int ApiServer::bind_to_any_port(const std::string& host)
{
    return impl_->server.bind_to_any_port(host);
}

bool ApiServer::bind(const std::string& host, int port)
{
    return impl_->server.bind_to_port(host, port);
}

bool ApiServer::listen_after_bind()
{
    return impl_->server.listen_after_bind();
}

void ApiServer::wait_until_ready() const
{
    impl_->server.wait_until_ready();
}

void ApiServer::stop()
{
    impl_->server.stop();
}

} // namespace iva
