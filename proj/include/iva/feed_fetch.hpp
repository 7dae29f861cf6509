#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iva {

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FetchResult {
    std::string source;
    /// True when the source reported no change since `previous_stamp`; body is empty then.
    bool unchanged = false;
    /// Decompressed document bytes (gzip input is inflated transparently).
    std::string body;
    /// Modification stamp to pass back on the next fetch. For local files this
    /// encodes mtime and size; for HTTP(S) the ETag / Last-Modified headers.
    std::string stamp;
};

bool is_remote_source(std::string_view source);

/// Fetches one local path or http(s) URL. Remote fetches send conditional
/// request headers derived from `previous_stamp`. Throws NetworkError or NotFound.
FetchResult fetch_feed(const std::string& source,
                       const std::optional<std::string>& previous_stamp = std::nullopt);

struct FetchRequest {
    std::string source;
    std::optional<std::string> previous_stamp;
};

/// Fetches every source in order; the first failure propagates.
std::vector<FetchResult> fetch_feeds(std::span<const FetchRequest> requests);

/// Inflates gzip data; returns the input unchanged when it is not gzip.
std::string maybe_gunzip(std::string data);

} // namespace iva
