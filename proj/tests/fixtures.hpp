#pragma once

#include "iva/catalog.hpp"
#include "iva/feed_parser.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <unistd.h>

namespace iva::testing {

inline std::filesystem::path fixture_path(const std::string& name)
{
    return std::filesystem::path(IVA_FIXTURE_DIR) / name;
}

inline std::ifstream open_fixture(const std::string& name)
{
    std::ifstream in(fixture_path(name), std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + name);
    return in;
}

inline CatalogSnapshot load_fixture_snapshot(const std::string& dictionary = "dictionary.xml",
                                             const std::string& feed = "cve_feed.xml")
{
    auto d = open_fixture(dictionary);
    auto f = open_fixture(feed);
    auto dict = parse_cpe_dictionary(d);
    auto cves = parse_cve_feed(f);
    return CatalogSnapshot::build(std::move(dict.entries), std::move(cves.entries),
                                  "2017-02-14T00:00:00Z");
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("iva-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::error_code ec; std::filesystem::remove_all(path_, ec); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace iva::testing
