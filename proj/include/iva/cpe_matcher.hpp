#pragma once

#include "iva/catalog.hpp"
#include "iva/search_terms.hpp"
#include "iva/version.hpp"

#include <cstddef>
#include <vector>

namespace iva {

/// Edit-distance bound shared by dictionary matching (distance <= bound) and
/// CVE matching (distance < bound + 1).
inline constexpr std::size_t kDefaultMaxDistance = 2;

struct VersionAffinity {
    bool exact = false;
    std::size_t common_prefix = 0;

    friend bool operator==(const VersionAffinity&, const VersionAffinity&) = default;
};

struct CpeCandidate {
    CpeDictEntry entry;
    std::size_t rank = 0;
    std::size_t vendor_distance = 0;
    std::size_t product_distance = 0;
    VersionAffinity version_affinity;
};

/// Every dictionary entry whose vendor is within `max_distance` of some vendor
/// term (vacuous when there are none) and whose product is within
/// `max_distance` of some product term. Version-like product terms only match
/// at distance 0. Deprecated hits are replaced by the entry their deprecation
/// chain ends at. The result is ranked by rank_by_version.
std::vector<CpeCandidate> match_cpe_candidates(const SearchTerms& terms,
                                               const CatalogSnapshot& snapshot,
                                               const VersionKey& product_version,
                                               std::size_t max_distance = kDefaultMaxDistance);

/// Stable sort on: exact version match, longer common leading version prefix,
/// smaller product distance, smaller vendor distance, URI. Ranks are
/// reassigned 1..n.
void rank_by_version(std::vector<CpeCandidate>& candidates, const VersionKey& product_version);

/// Generates terms from `product`, matches, ranks.
std::vector<CpeCandidate> find_cpe_candidates(const InventoryProduct& product,
                                              const CatalogSnapshot& snapshot,
                                              std::size_t max_distance = kDefaultMaxDistance);

} // namespace iva
