#include "iva/cpe_matcher.hpp"

#include "iva/levenshtein.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>

namespace iva {

namespace {

std::optional<std::size_t> best_distance(const std::vector<std::string>& terms,
                                         const std::string& value, std::size_t max_distance,
                                         bool guard_version_terms)
{
    std::optional<std::size_t> best;
    for (const auto& term : terms) {
        if (guard_version_terms && is_version_like(term)) {
            if (term == value) return 0;
            continue;
        }
        auto d = levenshtein_within(term, value, max_distance);
        if (d && (!best || *d < *best)) {
            best = d;
            if (*best == 0) break;
        }
    }
    return best;
}

VersionAffinity affinity_of(const CpeDictEntry& entry, const VersionKey& product_version)
{
    const auto& v = entry.wfn.version();
    if (!v.is_string()) return {};
    VersionAffinity a;
    a.exact = !product_version.raw.empty() && v.text() == product_version.raw;
    a.common_prefix = common_prefix_length(parse_version(v.text()), product_version);
    return a;
}

} // namespace

void rank_by_version(std::vector<CpeCandidate>& candidates, const VersionKey& product_version)
{
    for (auto& c : candidates) c.version_affinity = affinity_of(c.entry, product_version);
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        const auto& va = a.version_affinity;
        const auto& vb = b.version_affinity;
        if (va.exact != vb.exact) return va.exact;
        if (va.common_prefix != vb.common_prefix) return va.common_prefix > vb.common_prefix;
        if (a.product_distance != b.product_distance) return a.product_distance < b.product_distance;
        if (a.vendor_distance != b.vendor_distance) return a.vendor_distance < b.vendor_distance;
        return a.entry.uri < b.entry.uri;
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].rank = i + 1;
}

std::vector<CpeCandidate> match_cpe_candidates(const SearchTerms& terms,
                                               const CatalogSnapshot& snapshot,
                                               const VersionKey& product_version,
                                               std::size_t max_distance)
{
    const auto dict = snapshot.dictionary();

    // (entry index, vendor distance) for entries passing the vendor condition.
    std::vector<std::pair<std::size_t, std::size_t>> vendor_hits;
    if (terms.vendor_terms.empty()) {
        for (std::size_t i = 0; i < dict.size(); ++i) vendor_hits.emplace_back(i, 0);
    } else {
        for (const auto& [value, entries] : snapshot.vendor_values()) {
            auto d = best_distance(terms.vendor_terms, value, max_distance, false);
            if (!d) continue;
            for (auto idx : entries) vendor_hits.emplace_back(idx, *d);
        }
    }

    std::unordered_map<std::string, std::optional<std::size_t>> product_cache;
    // Keyed by the URI of the entry the hit resolves to.
    std::map<std::string, CpeCandidate> by_uri;
    for (auto [idx, vendor_d] : vendor_hits) {
        const auto& entry = dict[idx];
        const auto& product = entry.wfn.product();
        if (!product.is_string()) continue;
        auto [it, inserted] = product_cache.try_emplace(product.text());
        if (inserted) it->second = best_distance(terms.product_terms, product.text(), max_distance, true);
        if (!it->second) continue;

        const CpeDictEntry* target = &entry;
        if (entry.deprecated) {
            if (const auto* resolved = snapshot.resolve_deprecation(entry)) target = resolved;
        }
        CpeCandidate cand{*target, 0, vendor_d, *it->second, {}};
        auto [slot, fresh] = by_uri.try_emplace(target->uri, cand);
        if (!fresh) {
            auto& cur = slot->second;
            if (std::tie(cand.product_distance, cand.vendor_distance) <
                std::tie(cur.product_distance, cur.vendor_distance)) {
                cur.product_distance = cand.product_distance;
                cur.vendor_distance = cand.vendor_distance;
            }
        }
    }

    std::vector<CpeCandidate> out;
    out.reserve(by_uri.size());
    for (auto& [uri, cand] : by_uri) out.push_back(std::move(cand));
    rank_by_version(out, product_version);
    return out;
}

std::vector<CpeCandidate> find_cpe_candidates(const InventoryProduct& product,
                                              const CatalogSnapshot& snapshot,
                                              std::size_t max_distance)
{
    return match_cpe_candidates(generate_search_terms(product), snapshot,
                                parse_version(product.version_raw), max_distance);
}

} // namespace iva
