#pragma once

// JSON encodings shared by the HTTP API and the CLI's --format json output.
//
// Field order within each object is alphabetical (nlohmann::json default),
// which keeps output byte-stable for identical inputs.
//
// Wfn:          {"part": "a", "vendor": "mozilla", ..., "other": "ANY"}
//               all 11 attributes; ANY and NA are the upper-case logical values
// CpeCandidate: {"rank", "uri", "formatted", "title", "vendor_distance",
//                "product_distance", "version_exact", "version_common_prefix"}
// CveCandidate: {"cve_id", "origin", "exact_version", "matched_cpes", "summary",
//                "cvss_score", "published"}
// Alert:        {"id", "product_id", "cve_id", "assignment", "origin",
//                "matched_cpes", "exact_version", "summary", "cvss_score",
//                "state", "decided_by", "decided_at", "created_at", "group_id"}

#include "iva/cpe_matcher.hpp"
#include "iva/cve_matcher.hpp"
#include "iva/triage.hpp"

#include "json.hpp"

namespace iva {

nlohmann::json wfn_to_json(const Wfn& wfn);

/// Accepts the attribute object produced by wfn_to_json (missing keys are ANY,
/// STRING values are normalised like WFN text), or {"uri": ...} / {"fs": ...}.
/// Throws InvalidWfn, MalformedUri or MalformedFormattedString.
Wfn wfn_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CpeCandidate& c);
nlohmann::json to_json(const CveCandidate& c);
nlohmann::json to_json(const InventoryRecord& r);
nlohmann::json to_json(const Assignment& a);
nlohmann::json to_json(const ProductView& p);
nlohmann::json to_json(const Alert& a);
nlohmann::json to_json(const AlertGroup& g);
nlohmann::json to_json(const ImportSummary& s);
nlohmann::json to_json(const CandidateList& c);
nlohmann::json to_json(const AssignResult& r);
nlohmann::json to_json(const ScanResult& r);
nlohmann::json to_json(const RescanSummary& s);
nlohmann::json to_json(const Report& r);

} // namespace iva
