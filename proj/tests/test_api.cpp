#include "doctest.h"
#include "fixtures.hpp"

#include "iva/api_server.hpp"

#include "httplib.h"
#include "json.hpp"

#include <thread>

using namespace iva;
using nlohmann::json;

namespace {

constexpr const char* kInventory =
    "external_id,vendor,product,version\n"
    "p1,Mozilla,SeaMonkey,2.35\n"
    "p2,\"The Wireshark developer community, https://www.wireshark.org\",Wireshark 2.0.0 (32-bit),2.0.0\n"
    "p3,Oracle Corporation,MySQL Server 5.7,5.7.15\n";

struct Running {
    TriageService service;
    ApiServer server;
    std::thread thread;
    int port = -1;

    explicit Running(ApiOptions options = {}, bool with_snapshot = true)
        : service(":memory:", opts()), server(service, std::move(options))
    {
        if (with_snapshot) {
            service.set_snapshot(std::make_shared<const CatalogSnapshot>(testing::load_fixture_snapshot()));
        }
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~Running()
    {
        server.stop();
        thread.join();
    }

    static TriageOptions opts()
    {
        TriageOptions o;
        o.clock = [] { return std::string("2017-03-01T00:00:00Z"); };
        return o;
    }

    httplib::Client client() const
    {
        httplib::Client c("127.0.0.1", port);
        c.set_connection_timeout(5);
        return c;
    }
};

json body_of(const httplib::Result& r)
{
    REQUIRE(r);
    auto j = json::parse(r->body);
    CHECK(j["api_version"] == 1);
    return j;
}

json data_of(const httplib::Result& r)
{
    REQUIRE(r);
    CAPTURE(r->body);
    CHECK(r->status == 200);
    return body_of(r)["data"];
}

std::string error_code(const httplib::Result& r, int status)
{
    REQUIRE(r);
    CAPTURE(r->body);
    CHECK(r->status == status);
    return body_of(r)["error"]["code"].get<std::string>();
}

std::int64_t import_and_find(httplib::Client& c, const std::string& ext)
{
    httplib::MultipartFormDataItems items{{"file", kInventory, "inventory.csv", "text/csv"}};
    auto imported = data_of(c.Post("/api/v1/inventory/import", items));
    CHECK(imported["created"] == 3);
    for (const auto& p : data_of(c.Get("/api/v1/products"))) {
        if (p["external_id"] == ext) return p["id"].get<std::int64_t>();
    }
    FAIL("missing product " << ext);
    return 0;
}

} // namespace

TEST_CASE("end-to-end triage over HTTP")
{
    Running api;
    auto c = api.client();
    auto ws = import_and_find(c, "p2");

    auto products = data_of(c.Get("/api/v1/products?status=unassigned"));
    CHECK(products.size() == 3);
    CHECK(products[1]["vendor"] == "The Wireshark developer community, https://www.wireshark.org");
    CHECK(products[1]["status"] == "unassigned");

    auto cands = data_of(c.Get("/api/v1/products/" + std::to_string(ws) + "/candidates?limit=3"));
    CHECK(cands["candidates"].size() <= 3);
    CHECK(cands["candidates"][0]["uri"] == "cpe:/a:wireshark:wireshark:2.0.0");

    auto assigned = data_of(c.Put("/api/v1/products/" + std::to_string(ws) + "/assignment",
                                  R"({"uri":"cpe:/a:wireshark:wireshark:2.0.0","user":"alice"})", "application/json"));
    CHECK(assigned["changed"] == true);
    CHECK(assigned["assignment"]["source"] == "CANDIDATE_SELECTED");
    CHECK(assigned["assignment"]["assigned_by"] == "alice");
    CHECK(assigned["new_alerts"].size() == 3);

    auto scan = data_of(c.Post("/api/v1/products/" + std::to_string(ws) + "/scan", "", "application/json"));
    CHECK(scan["new_alerts"].empty());

    auto groups = data_of(c.Get("/api/v1/products/" + std::to_string(ws) + "/alerts?grouped=true"));
    REQUIRE(groups.size() == 2);
    auto gid = groups[1]["group_id"].get<std::string>();
    auto decided = data_of(c.Post("/api/v1/alerts/decide",
                                  json{{"group_id", gid}, {"decision", "DISCARDED"}}.dump(), "application/json"));
    CHECK(decided.size() == groups[1]["members"].size());
    CHECK(decided[0]["decided_by"] == "api");

    auto first_id = groups[0]["members"][0]["id"].get<std::int64_t>();
    data_of(c.Post("/api/v1/alerts/decide", json{{"alert_ids", {first_id}}, {"decision", "CONFIRMED"}}.dump(),
                   "application/json"));
    CHECK(error_code(c.Post("/api/v1/alerts/decide",
                            json{{"alert_ids", {first_id}}, {"decision", "DISCARDED"}}.dump(), "application/json"),
                     409) == "ALREADY_DECIDED");

    auto pending = data_of(c.Get("/api/v1/products/" + std::to_string(ws) + "/alerts?state=PENDING"));
    auto report = data_of(c.Get("/api/v1/reports/summary"));
    CHECK(report["products_assigned"] == 1);
    CHECK(report["alerts"]["confirmed"] == 1);
    CHECK(report["alerts"]["pending"] == pending.size());
    CHECK(report["alerts"]["discarded"] == 3 - 1 - pending.size());

    auto unassigned = data_of(c.Get("/api/v1/reports/summary?status=unassigned"));
    CHECK(unassigned["products"].size() == 2);

    auto rescan = data_of(c.Post("/api/v1/admin/rescan", "", "application/json"));
    CHECK(rescan["status"] == "rescanned");
    CHECK(rescan["new_alerts"] == 0);

    // Identical requests give identical bodies.
    CHECK(c.Get("/api/v1/reports/summary")->body == c.Get("/api/v1/reports/summary")->body);
}

TEST_CASE("user-edited assignment via attribute object")
{
    Running api;
    auto c = api.client();
    auto pid = import_and_find(c, "p3");
    auto r = data_of(c.Put("/api/v1/products/" + std::to_string(pid) + "/assignment",
                           R"({"wfn":{"part":"a","vendor":"Oracle","product":"MySQL","version":"5.7"},)"
                           R"("source":"USER_EDITED","derived_from":"cpe:/a:oracle:mysql:5.7.15"})",
                           "application/json"));
    CHECK(r["assignment"]["uri"] == "cpe:/a:oracle:mysql:5.7");
    CHECK(r["assignment"]["source"] == "USER_EDITED");
    CHECK(r["assignment"]["derived_from"] == "cpe:/a:oracle:mysql:5.7.15");
    CHECK(r["assignment"]["wfn"]["update"] == "ANY");
}

TEST_CASE("error mapping")
{
    Running api;
    auto c = api.client();
    auto pid = std::to_string(import_and_find(c, "p1"));

    CHECK(error_code(c.Get("/api/v1/products/999/candidates"), 404) == "UNKNOWN_PRODUCT");
    CHECK(error_code(c.Post("/api/v1/products/" + pid + "/scan", "", "application/json"), 409) == "UNASSIGNED");
    CHECK(error_code(c.Put("/api/v1/products/" + pid + "/assignment", R"({"uri":"cpe:/a::x"})", "application/json"),
                     400) == "INVALID_WFN");
    CHECK(error_code(c.Put("/api/v1/products/" + pid + "/assignment", R"({"uri":"nonsense"})", "application/json"),
                     400) == "INVALID_WFN");
    CHECK(error_code(c.Put("/api/v1/products/" + pid + "/assignment", "{not json", "application/json"), 400) ==
          "BAD_REQUEST");
    CHECK(error_code(c.Post("/api/v1/alerts/decide", R"({"alert_ids":[424242],"decision":"CONFIRMED"})",
                            "application/json"),
                     404) == "UNKNOWN_ALERT");
    CHECK(error_code(c.Post("/api/v1/alerts/decide", R"({"alert_ids":[1],"decision":"PENDING"})", "application/json"),
                     400) == "BAD_REQUEST");
    CHECK(error_code(c.Post("/api/v1/inventory/import", "", "text/csv"), 422) == "EMPTY_FILE");
    CHECK(error_code(c.Post("/api/v1/inventory/import", "a,b\n1,2\n", "text/csv"), 422) == "FORMAT_ERROR");
    CHECK(error_code(c.Get("/api/v1/products?status=maybe"), 400) == "BAD_REQUEST");
    CHECK(error_code(c.Get("/api/v1/nowhere"), 404) == "NOT_FOUND");
}

TEST_CASE("no snapshot loaded")
{
    Running api({}, false);
    auto c = api.client();
    auto pid = import_and_find(c, "p1");
    CHECK(error_code(c.Get("/api/v1/products/" + std::to_string(pid) + "/candidates"), 503) == "NO_SNAPSHOT");
}

TEST_CASE("bearer token")
{
    Running api(ApiOptions{.bearer_token = "s3cret"});
    auto c = api.client();
    CHECK(error_code(c.Get("/api/v1/products"), 401) == "UNAUTHORIZED");
    c.set_bearer_token_auth("wrong");
    CHECK(error_code(c.Get("/api/v1/products"), 401) == "UNAUTHORIZED");
    c.set_bearer_token_auth("s3cret");
    CHECK(data_of(c.Get("/api/v1/products")).empty());
}

TEST_CASE("raw-body import with source parameter")
{
    Running api;
    auto c = api.client();
    auto r = data_of(c.Post("/api/v1/inventory/import?source=sccm",
                            R"([{"vendor":"Mozilla","product":"SeaMonkey","version":"2.35"}])", "application/json"));
    CHECK(r["created"] == 1);
    CHECK(data_of(c.Get("/api/v1/products"))[0]["source"] == "sccm");
}
