#pragma once

#include "iva/catalog.hpp"
#include "iva/cpe_matcher.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace iva {

enum class CveOrigin { cpe_list, summary };

std::string_view to_string(CveOrigin origin) noexcept;

struct CveCandidate {
    CveEntry cve;
    CveOrigin origin = CveOrigin::cpe_list;
    /// CPEs of the CVE that matched; empty iff origin is summary.
    std::vector<VulnerableCpe> matched_cpes;
    bool exact_version = false;
};

struct CveSearchOptions {
    std::size_t max_distance = kDefaultMaxDistance;
    /// Summary search: require one word similar to both product and vendor
    /// instead of two independent witness words.
    bool strict_single_word = false;
};

/// Searches every CVE's vulnerable-software list for CPEs whose vendor and
/// product are within the distance bound of the assigned WFN and whose
/// version relates to it (see relate_versions). Exact-version candidates come
/// first, then ascending CVE id. Throws InvalidWfn unless vendor and product
/// are STRING values.
std::vector<CveCandidate> search_cves_by_cpe(const Wfn& assigned, const CatalogSnapshot& snapshot,
                                             const CveSearchOptions& options = {});

/// Searches the summaries of CVEs with an empty vulnerable-software list.
/// A CPE value of k underscore-separated parts is compared against single
/// summary words and against underscore-joins of k consecutive words.
std::vector<CveCandidate> search_cves_by_summary(const Wfn& assigned,
                                                 const CatalogSnapshot& snapshot,
                                                 const CveSearchOptions& options = {});

/// Lowercased whitespace tokens with the punctuation .,;:()[]'"!? stripped
/// from both ends; empty results are dropped.
std::vector<std::string> summary_words(std::string_view summary);

/// Union keyed by CVE id, keeping the CPE-list candidate on collision.
/// Order: exact-version CPE-list, other CPE-list, summary; CVE id within each.
std::vector<CveCandidate> merge_candidates(std::vector<CveCandidate> by_cpe,
                                           std::vector<CveCandidate> by_summary);

struct CveGroup {
    /// Sorted matched CPE URIs joined by '\n', or "summary" for the summary group.
    std::string key;
    std::vector<std::string> cpes;
    std::vector<CveCandidate> members;
};

/// Groups candidates with equal matched CPE sets; all summary candidates form
/// one group. Groups appear in order of their first member.
std::vector<CveGroup> group_by_cpe(const std::vector<CveCandidate>& candidates);

/// Stable short identifier for a group key (FNV-1a 64, hex).
std::string group_digest(std::string_view key);

/// search_cves_by_cpe + search_cves_by_summary + merge_candidates.
std::vector<CveCandidate> find_cve_candidates(const Wfn& assigned, const CatalogSnapshot& snapshot,
                                              const CveSearchOptions& options = {});

} // namespace iva
