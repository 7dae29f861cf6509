#pragma once

#include "iva/catalog.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace iva {

struct DeprecationAudit {
    std::size_t total = 0;
    /// Declared reason -> count. Entries without a reason count as "UNSPECIFIED".
    std::map<std::string, std::size_t> by_reason;
    /// Deprecated URIs whose deprecated_by target is not in the dictionary
    /// (or whose chain cycles), paired with the missing target.
    std::vector<std::pair<std::string, std::string>> dangling;
};

struct SemanticDuplicate {
    std::string dictionary_uri;
    std::string feed_uri;

    friend bool operator==(const SemanticDuplicate&, const SemanticDuplicate&) = default;
    friend auto operator<=>(const SemanticDuplicate&, const SemanticDuplicate&) = default;
};

struct ConsistencyReport {
    std::vector<std::string> cves_without_cpes;
    std::vector<std::string> feed_cpes_missing;
    DeprecationAudit deprecations;
    std::vector<SemanticDuplicate> semantic_duplicates;
    std::string snapshot_time;
};

/// Ids of CVEs with an empty vulnerable-software list, in CVE id order.
std::vector<std::string> audit_cves_without_cpes(const CatalogSnapshot& snapshot);

/// Canonical feed CPE URIs absent from the dictionary, sorted.
std::vector<std::string> audit_missing_dictionary_cpes(const CatalogSnapshot& snapshot);

DeprecationAudit audit_deprecations(const CatalogSnapshot& snapshot);

/// Dictionary / feed URI pairs that differ as URIs but agree once a STRING
/// update is folded into the version ("1.4.0" + "beta1" == "1.4.0_beta1").
/// Each unordered pair is reported once, sorted.
std::vector<SemanticDuplicate> detect_semantic_duplicates(const CatalogSnapshot& snapshot);

/// Version/update folding used by detect_semantic_duplicates.
Wfn fold_update_into_version(const Wfn& wfn);

ConsistencyReport run_audit(const CatalogSnapshot& snapshot);

/// Versioned JSON document ("format": "iva-consistency-report", "version": 1).
std::string report_to_json(const ConsistencyReport& report);

/// Short human-readable summary, one line per audit.
std::string report_summary(const ConsistencyReport& report);

} // namespace iva
