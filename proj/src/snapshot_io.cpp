#include "iva/snapshot_io.hpp"

#include "json.hpp"

#include <fstream>
#include <string>

namespace iva {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "iva-catalog-snapshot";

json to_json(const CpeDictEntry& e)
{
    return json{
        {"uri", e.uri},
        {"formatted", e.formatted ? json(*e.formatted) : json(nullptr)},
        {"title", e.title},
        {"deprecated", e.deprecated},
        {"deprecated_by", e.deprecated_by ? json(*e.deprecated_by) : json(nullptr)},
        {"deprecation_reason", e.deprecation_reason},
    };
}

json to_json(const CveEntry& c)
{
    json software = json::array();
    for (const auto& v : c.vuln_software) software.push_back(v.uri);
    return json{
        {"id", c.id},
        {"summary", c.summary},
        {"published", c.published},
        {"cvss_score", c.cvss_score ? json(*c.cvss_score) : json(nullptr)},
        {"vuln_software", std::move(software)},
    };
}

std::optional<std::string> optional_string(const json& j, const char* key)
{
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
}

CpeDictEntry dict_from_json(const json& j)
{
    CpeDictEntry e;
    e.uri = j.at("uri").get<std::string>();
    e.wfn = unbind_uri(e.uri);
    e.formatted = optional_string(j, "formatted");
    e.title = j.at("title").get<std::string>();
    e.deprecated = j.at("deprecated").get<bool>();
    e.deprecated_by = optional_string(j, "deprecated_by");
    e.deprecation_reason = j.at("deprecation_reason").get<std::string>();
    return e;
}

CveEntry cve_from_json(const json& j)
{
    CveEntry c;
    c.id = j.at("id").get<std::string>();
    c.summary = j.at("summary").get<std::string>();
    c.published = j.at("published").get<std::string>();
    if (!j.at("cvss_score").is_null()) c.cvss_score = j.at("cvss_score").get<double>();
    for (const auto& u : j.at("vuln_software")) {
        auto uri = u.get<std::string>();
        auto wfn = unbind_uri(uri);
        c.vuln_software.push_back({std::move(uri), std::move(wfn)});
    }
    return c;
}

template <typename T, typename F>
std::vector<T> read_lines(const std::filesystem::path& file, F&& parse_one)
{
    std::ifstream in(file);
    if (!in) throw SnapshotFormatError("cannot open " + file.string());
    std::vector<T> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(parse_one(json::parse(line)));
        } catch (const std::exception& e) {
            throw SnapshotFormatError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace

void save_snapshot(const CatalogSnapshot& snapshot, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "dictionary.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& e : snapshot.dictionary()) out << to_json(e).dump() << '\n';
        if (!out) throw SnapshotFormatError("failed writing dictionary.jsonl");
    }
    {
        std::ofstream out(dir / "cves.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& c : snapshot.cves()) out << to_json(c).dump() << '\n';
        if (!out) throw SnapshotFormatError("failed writing cves.jsonl");
    }
    json manifest{
        {"format", kFormat},
        {"layout_version", kSnapshotLayoutVersion},
        {"snapshot_time", snapshot.snapshot_time()},
        {"dictionary_entries", snapshot.dictionary().size()},
        {"cve_entries", snapshot.cves().size()},
    };
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw SnapshotFormatError("failed writing manifest.json");
}

CatalogSnapshot load_snapshot(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in) throw SnapshotFormatError("no snapshot manifest in " + dir.string());
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw SnapshotFormatError(std::string("corrupt manifest: ") + e.what());
    }
    if (manifest.value("format", "") != kFormat ||
        manifest.value("layout_version", 0) != kSnapshotLayoutVersion) {
        throw SnapshotFormatError("unsupported snapshot layout in " + dir.string());
    }
    auto dict = read_lines<CpeDictEntry>(dir / "dictionary.jsonl", dict_from_json);
    auto cves = read_lines<CveEntry>(dir / "cves.jsonl", cve_from_json);
    if (dict.size() != manifest.value("dictionary_entries", std::size_t{0}) ||
        cves.size() != manifest.value("cve_entries", std::size_t{0})) {
        throw SnapshotFormatError("record counts disagree with manifest in " + dir.string());
    }
    return CatalogSnapshot::build(std::move(dict), std::move(cves),
                                  manifest.value("snapshot_time", std::string{}));
}

} // namespace iva
