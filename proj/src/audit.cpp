#include "iva/audit.hpp"

#include "json.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace iva {

std::vector<std::string> audit_cves_without_cpes(const CatalogSnapshot& snapshot)
{
    std::vector<std::string> ids;
    for (const auto& c : snapshot.cves()) {
        if (c.vuln_software.empty()) ids.push_back(c.id);
    }
    std::sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) { return cve_id_less(a, b); });
    return ids;
}

std::vector<std::string> audit_missing_dictionary_cpes(const CatalogSnapshot& snapshot)
{
    std::unordered_set<std::string> dictionary;
    for (const auto& e : snapshot.dictionary()) dictionary.insert(bind_to_uri(e.wfn));

    std::set<std::string> missing;
    for (const auto& c : snapshot.cves()) {
        for (const auto& v : c.vuln_software) {
            auto canon = bind_to_uri(v.wfn);
            if (!dictionary.contains(canon)) missing.insert(std::move(canon));
        }
    }
    return {missing.begin(), missing.end()};
}

DeprecationAudit audit_deprecations(const CatalogSnapshot& snapshot)
{
    DeprecationAudit audit;
    for (const auto& e : snapshot.dictionary()) {
        if (!e.deprecated) continue;
        ++audit.total;
        ++audit.by_reason[e.deprecation_reason.empty() ? "UNSPECIFIED" : e.deprecation_reason];
        if (snapshot.resolve_deprecation(e) == nullptr) {
            audit.dangling.emplace_back(e.uri, e.deprecated_by.value_or(""));
        }
    }
    return audit;
}

Wfn fold_update_into_version(const Wfn& wfn)
{
    const auto& update = wfn.update();
    const auto& version = wfn.version();
    if (!update.is_string() || !version.is_string()) return wfn;
    Wfn folded = wfn;
    folded.set(Attribute::version, AttributeValue::str(version.text() + "_" + update.text()));
    folded.set(Attribute::update, AttributeValue::any());
    return folded;
}

std::vector<SemanticDuplicate> detect_semantic_duplicates(const CatalogSnapshot& snapshot)
{
    std::unordered_map<std::string, std::vector<std::string>> dict_by_key;
    for (const auto& e : snapshot.dictionary()) {
        dict_by_key[bind_to_uri(fold_update_into_version(e.wfn))].push_back(bind_to_uri(e.wfn));
    }

    std::set<std::pair<std::string, std::string>> seen_unordered;
    std::vector<SemanticDuplicate> out;
    for (const auto& c : snapshot.cves()) {
        for (const auto& v : c.vuln_software) {
            auto feed_uri = bind_to_uri(v.wfn);
            auto it = dict_by_key.find(bind_to_uri(fold_update_into_version(v.wfn)));
            if (it == dict_by_key.end()) continue;
            for (const auto& dict_uri : it->second) {
                if (dict_uri == feed_uri) continue;
                auto key = std::minmax(dict_uri, feed_uri);
                if (seen_unordered.emplace(key.first, key.second).second) {
                    out.push_back({dict_uri, feed_uri});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ConsistencyReport run_audit(const CatalogSnapshot& snapshot)
{
    return ConsistencyReport{
        audit_cves_without_cpes(snapshot),
        audit_missing_dictionary_cpes(snapshot),
        audit_deprecations(snapshot),
        detect_semantic_duplicates(snapshot),
        snapshot.snapshot_time(),
    };
}

std::string report_to_json(const ConsistencyReport& report)
{
    using nlohmann::json;
    json dangling = json::array();
    for (const auto& [uri, target] : report.deprecations.dangling) {
        dangling.push_back({{"uri", uri}, {"deprecated_by", target}});
    }
    json pairs = json::array();
    for (const auto& p : report.semantic_duplicates) {
        pairs.push_back({{"dictionary", p.dictionary_uri}, {"feed", p.feed_uri}});
    }
    json doc{
        {"format", "iva-consistency-report"},
        {"version", 1},
        {"snapshot_time", report.snapshot_time},
        {"cves_without_cpes",
         {{"count", report.cves_without_cpes.size()}, {"ids", report.cves_without_cpes}}},
        {"feed_cpes_missing",
         {{"count", report.feed_cpes_missing.size()}, {"uris", report.feed_cpes_missing}}},
        {"deprecations",
         {{"total", report.deprecations.total},
          {"by_reason", report.deprecations.by_reason},
          {"dangling", std::move(dangling)}}},
        {"semantic_duplicates",
         {{"count", report.semantic_duplicates.size()}, {"pairs", std::move(pairs)}}},
    };
    return doc.dump(2) + "\n";
}

std::string report_summary(const ConsistencyReport& report)
{
    std::ostringstream out;
    out << "snapshot: " << report.snapshot_time << '\n';
    out << "CVE entries without CPE identifiers: " << report.cves_without_cpes.size() << '\n';
    out << "feed CPEs missing from the dictionary: " << report.feed_cpes_missing.size() << '\n';
    out << "deprecated dictionary entries: " << report.deprecations.total;
    for (const auto& [reason, n] : report.deprecations.by_reason) out << " [" << reason << ": " << n << ']';
    out << '\n';
    out << "dangling deprecations: " << report.deprecations.dangling.size() << '\n';
    out << "semantic duplicates (dictionary vs feed): " << report.semantic_duplicates.size() << '\n';
    return out.str();
}

} // namespace iva
