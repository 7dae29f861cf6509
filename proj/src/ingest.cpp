#include "iva/feed_parser.hpp"

#include <sstream>

namespace iva {

CatalogSnapshot ingest_documents(std::string_view dictionary_xml, std::span<const std::string> feed_xmls,
                                 std::string snapshot_time, IngestReport* report)
{
    IngestReport local;
    std::istringstream dict_in{std::string(dictionary_xml)};
    auto dict = parse_cpe_dictionary(dict_in);
    local.dictionary_items = dict.items_seen;
    local.dictionary_entries = dict.entries.size();
    local.skipped = std::move(dict.skipped);

    std::vector<CveEntry> cves;
    for (const auto& xml : feed_xmls) {
        std::istringstream in(xml);
        auto feed = parse_cve_feed(in);
        local.cve_entries_seen += feed.entries_seen;
        for (auto& s : feed.skipped) local.skipped.push_back(std::move(s));
        for (auto& s : feed.skipped_cpes) local.skipped.push_back(std::move(s));
        for (auto& e : feed.entries) cves.push_back(std::move(e));
    }
    local.cve_entries = cves.size();
    auto snapshot = CatalogSnapshot::build(std::move(dict.entries), std::move(cves), std::move(snapshot_time));
    if (report) *report = std::move(local);
    return snapshot;
}

} // namespace iva
