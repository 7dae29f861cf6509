#include "iva/feed_fetch.hpp"

#include "json.hpp"

#include <curl/curl.h>
#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

namespace iva {

namespace {

void ensure_curl_global()
{
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

size_t write_body(char* ptr, size_t size, size_t nmemb, void* user)
{
    static_cast<std::string*>(user)->append(ptr, size * nmemb);
    return size * nmemb;
}

struct Headers {
    std::string etag;
    std::string last_modified;
};

std::string trim_header(std::string_view v)
{
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return std::string(v);
}

size_t write_header(char* ptr, size_t size, size_t nmemb, void* user)
{
    std::string_view line(ptr, size * nmemb);
    auto colon = line.find(':');
    if (colon != std::string_view::npos) {
        std::string name(line.substr(0, colon));
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        auto* h = static_cast<Headers*>(user);
        if (name == "etag") h->etag = trim_header(line.substr(colon + 1));
        if (name == "last-modified") h->last_modified = trim_header(line.substr(colon + 1));
    }
    return size * nmemb;
}

struct CurlDeleter {
    void operator()(CURL* c) const { curl_easy_cleanup(c); }
};
struct SlistDeleter {
    void operator()(curl_slist* l) const { curl_slist_free_all(l); }
};

FetchResult fetch_remote(const std::string& url, const std::optional<std::string>& previous_stamp)
{
    ensure_curl_global();
    std::unique_ptr<CURL, CurlDeleter> curl(curl_easy_init());
    if (!curl) throw NetworkError("cannot initialise HTTP client");

    std::unique_ptr<curl_slist, SlistDeleter> request_headers;
    if (previous_stamp && !previous_stamp->empty()) {
        auto stamp = nlohmann::json::parse(*previous_stamp, nullptr, false);
        curl_slist* list = nullptr;
        if (stamp.is_object()) {
            if (auto etag = stamp.value("etag", std::string{}); !etag.empty()) {
                list = curl_slist_append(list, ("If-None-Match: " + etag).c_str());
            }
            if (auto lm = stamp.value("last_modified", std::string{}); !lm.empty()) {
                list = curl_slist_append(list, ("If-Modified-Since: " + lm).c_str());
            }
        }
        request_headers.reset(list);
    }

    std::string body;
    Headers headers;
    char errbuf[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, write_body);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
    curl_easy_setopt(curl.get(), CURLOPT_HEADERFUNCTION, write_header);
    curl_easy_setopt(curl.get(), CURLOPT_HEADERDATA, &headers);
    curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, errbuf);
    curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "iva-feed-fetch/1");
    if (request_headers) curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, request_headers.get());

    auto rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) {
        throw NetworkError("fetching " + url + ": " + (errbuf[0] ? errbuf : curl_easy_strerror(rc)));
    }
    long status = 0;
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);

    FetchResult result;
    result.source = url;
    if (status == 304) {
        result.unchanged = true;
        result.stamp = previous_stamp.value_or("");
        return result;
    }
    if (status == 404 || status == 410) throw NotFound("HTTP " + std::to_string(status) + " for " + url);
    if (status < 200 || status >= 300) {
        throw NetworkError("HTTP " + std::to_string(status) + " for " + url);
    }
    result.body = maybe_gunzip(std::move(body));
    result.stamp = nlohmann::json{{"etag", headers.etag}, {"last_modified", headers.last_modified}}.dump();
    return result;
}

FetchResult fetch_local(const std::string& path, const std::optional<std::string>& previous_stamp)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    auto status = fs::status(path, ec);
    if (ec || !fs::is_regular_file(status)) throw NotFound("no such file: " + path);
    auto mtime = fs::last_write_time(path, ec);
    auto size = fs::file_size(path, ec);
    if (ec) throw NetworkError("cannot stat " + path + ": " + ec.message());

    FetchResult result;
    result.source = path;
    result.stamp = "mtime=" + std::to_string(mtime.time_since_epoch().count()) +
                   ";size=" + std::to_string(size);
    if (previous_stamp && *previous_stamp == result.stamp) {
        result.unchanged = true;
        return result;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    result.body = maybe_gunzip(std::move(buf).str());
    return result;
}

} // namespace

bool is_remote_source(std::string_view source)
{
    return source.starts_with("http://") || source.starts_with("https://");
}

FetchResult fetch_feed(const std::string& source, const std::optional<std::string>& previous_stamp)
{
    return is_remote_source(source) ? fetch_remote(source, previous_stamp)
                                    : fetch_local(source, previous_stamp);
}

std::vector<FetchResult> fetch_feeds(std::span<const FetchRequest> requests)
{
    std::vector<FetchResult> out;
    out.reserve(requests.size());
    for (const auto& r : requests) out.push_back(fetch_feed(r.source, r.previous_stamp));
    return out;
}

std::string maybe_gunzip(std::string data)
{
    if (data.size() < 2 || static_cast<unsigned char>(data[0]) != 0x1f ||
        static_cast<unsigned char>(data[1]) != 0x8b) {
        return data;
    }
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw NetworkError("zlib init failed");
    zs.next_in = reinterpret_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    char chunk[64 * 1024];
    int ret = Z_OK;
    while (ret != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(chunk);
        zs.avail_out = sizeof(chunk);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw NetworkError("corrupt gzip data");
        }
        out.append(chunk, sizeof(chunk) - zs.avail_out);
        if (ret == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw NetworkError("truncated gzip data");
        }
    }
    inflateEnd(&zs);
    return out;
}

} // namespace iva
