#include "doctest.h"
#include "fixtures.hpp"

#include "iva/feed_fetch.hpp"

#include "httplib.h"
#include <zlib.h>

#include <atomic>
#include <fstream>
#include <thread>

using namespace iva;

namespace {

std::string gzip(const std::string& data)
{
    z_stream zs{};
    deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

class StubServer {
public:
    StubServer()
    {
        server_.Get("/feed.xml", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            if (req.get_header_value("If-None-Match") == "\"v1\"") {
                res.status = 304;
                return;
            }
            res.set_header("ETag", "\"v1\"");
            res.set_header("Last-Modified", "Tue, 14 Feb 2017 03:00:01 GMT");
            res.set_content("<nvd/>", "application/xml");
        });
        server_.Get("/feed.xml.gz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(gzip("<nvd>gz</nvd>"), "application/gzip");
        });
        server_.Get("/gone", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
        server_.Get("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer()
    {
        server_.stop();
        thread_.join();
    }

    std::string url(const std::string& path) const
    {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

    std::atomic<int> hits{0};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST_CASE("local file fetch and change stamp")
{
    testing::TempDir dir("fetch");
    auto path = (dir.path() / "feed.xml").string();
    {
        std::ofstream(path) << "<nvd/>";
    }
    auto first = fetch_feed(path);
    CHECK_FALSE(first.unchanged);
    CHECK(first.body == "<nvd/>");
    CHECK_FALSE(first.stamp.empty());

    auto second = fetch_feed(path, first.stamp);
    CHECK(second.unchanged);
    CHECK(second.body.empty());
    CHECK(second.stamp == first.stamp);

    {
        std::ofstream(path, std::ios::app) << "<!-- more -->";
    }
    auto third = fetch_feed(path, first.stamp);
    CHECK_FALSE(third.unchanged);
    CHECK(third.stamp != first.stamp);

    CHECK_THROWS_AS(fetch_feed((dir.path() / "absent.xml").string()), NotFound);
}

TEST_CASE("gzip input is inflated")
{
    CHECK(maybe_gunzip(gzip("hello feed")) == "hello feed");
    CHECK(maybe_gunzip("plain") == "plain");
    auto truncated = gzip(std::string(5000, 'x'));
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(maybe_gunzip(truncated), NetworkError);
}

TEST_CASE("HTTP conditional fetch")
{
    StubServer stub;
    auto first = fetch_feed(stub.url("/feed.xml"));
    CHECK_FALSE(first.unchanged);
    CHECK(first.body == "<nvd/>");
    CHECK(first.stamp.find("\\\"v1\\\"") != std::string::npos);

    auto second = fetch_feed(stub.url("/feed.xml"), first.stamp);
    CHECK(second.unchanged);
    CHECK(second.body.empty());
    CHECK(stub.hits == 2);

    CHECK(fetch_feed(stub.url("/feed.xml.gz")).body == "<nvd>gz</nvd>");
    CHECK_THROWS_AS(fetch_feed(stub.url("/gone")), NotFound);
    CHECK_THROWS_AS(fetch_feed(stub.url("/broken")), NetworkError);
}

TEST_CASE("unreachable host is a network error")
{
    CHECK_THROWS_AS(fetch_feed("http://127.0.0.1:1/feed.xml"), NetworkError);
}

TEST_CASE("fetch_feeds keeps order and propagates the first failure")
{
    std::vector<FetchRequest> reqs{{testing::fixture_path("dictionary.xml").string(), std::nullopt},
                                   {testing::fixture_path("cve_feed.xml").string(), std::nullopt}};
    auto results = fetch_feeds(reqs);
    REQUIRE(results.size() == 2);
    CHECK(results[1].source == reqs[1].source);
    CHECK(results[1].body.find("CVE-2016-0006") != std::string::npos);

    reqs.push_back({"/nonexistent/feed.xml", std::nullopt});
    CHECK_THROWS_AS(fetch_feeds(reqs), NotFound);
}
