#include "iva/cve_matcher.hpp"

#include "iva/levenshtein.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>

namespace iva {

namespace {

constexpr std::string_view kSummaryGroupKey = "summary";
constexpr std::string_view kStripPunctuation = ".,;:()[]'\"!?";

class SimilarityCache {
public:
    SimilarityCache(std::string target, std::size_t max_distance)
        : target_(std::move(target)), max_distance_(max_distance)
    {
    }

    bool operator()(const std::string& value)
    {
        auto [it, inserted] = cache_.try_emplace(value, false);
        if (inserted) it->second = levenshtein_within(target_, value, max_distance_).has_value();
        return it->second;
    }

private:
    std::string target_;
    std::size_t max_distance_;
    std::unordered_map<std::string, bool> cache_;
};

void sort_by_exact_then_id(std::vector<CveCandidate>& v)
{
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.exact_version != b.exact_version) return a.exact_version;
        return cve_id_less(a.cve.id, b.cve.id);
    });
}

const std::string& require_string(const AttributeValue& v, const char* what)
{
    if (!v.is_string()) throw InvalidWfn(std::string("assigned CPE must have a concrete ") + what);
    return v.text();
}

std::size_t part_count(const std::string& value)
{
    return static_cast<std::size_t>(std::count(value.begin(), value.end(), '_')) + 1;
}

void add_joins(std::vector<std::string>& out, const std::vector<std::string>& words, std::size_t k)
{
    if (k < 2 || words.size() < k) return;
    for (std::size_t i = 0; i + k <= words.size(); ++i) {
        std::string joined = words[i];
        for (std::size_t j = 1; j < k; ++j) {
            joined.push_back('_');
            joined += words[i + j];
        }
        out.push_back(std::move(joined));
    }
}

} // namespace

std::string_view to_string(CveOrigin origin) noexcept
{
    return origin == CveOrigin::cpe_list ? "CPE_LIST" : "SUMMARY";
}

std::vector<CveCandidate> search_cves_by_cpe(const Wfn& assigned, const CatalogSnapshot& snapshot,
                                             const CveSearchOptions& options)
{
    const auto& sw_vendor = require_string(assigned.vendor(), "vendor");
    const auto& sw_product = require_string(assigned.product(), "product");
    const auto& sw_version_value = assigned.version();
    const VersionKey sw_version = parse_version(sw_version_value.is_string() ? sw_version_value.text() : "");

    auto relate = [&](const AttributeValue& cve_version) {
        if (sw_version_value.is_any()) {
            return cve_version.is_na() ? VersionRelation::none : VersionRelation::any_version;
        }
        if (sw_version_value.is_na()) {
            return cve_version.is_any() ? VersionRelation::any_version : VersionRelation::none;
        }
        return relate_versions(sw_version, cve_version);
    };

    SimilarityCache similar_vendor(sw_vendor, options.max_distance);
    SimilarityCache similar_product(sw_product, options.max_distance);

    std::vector<CveCandidate> out;
    for (const auto& cve : snapshot.cves()) {
        CveCandidate cand;
        for (const auto& cpe : cve.vuln_software) {
            const auto& product = cpe.wfn.product();
            const auto& vendor = cpe.wfn.vendor();
            if (!product.is_string() || !vendor.is_string()) continue;
            if (!similar_product(product.text()) || !similar_vendor(vendor.text())) continue;
            auto rel = relate(cpe.wfn.version());
            if (rel == VersionRelation::none) continue;
            cand.matched_cpes.push_back(cpe);
            cand.exact_version = cand.exact_version || is_exact(rel);
        }
        if (!cand.matched_cpes.empty()) {
            cand.cve = cve;
            cand.origin = CveOrigin::cpe_list;
            out.push_back(std::move(cand));
        }
    }
    sort_by_exact_then_id(out);
    return out;
}

std::vector<std::string> summary_words(std::string_view summary)
{
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < summary.size()) {
        while (i < summary.size() && std::isspace(static_cast<unsigned char>(summary[i]))) ++i;
        std::size_t start = i;
        while (i < summary.size() && !std::isspace(static_cast<unsigned char>(summary[i]))) ++i;
        auto word = summary.substr(start, i - start);
        while (!word.empty() && kStripPunctuation.find(word.front()) != std::string_view::npos) {
            word.remove_prefix(1);
        }
        while (!word.empty() && kStripPunctuation.find(word.back()) != std::string_view::npos) {
            word.remove_suffix(1);
        }
        if (word.empty()) continue;
        std::string w(word);
        std::transform(w.begin(), w.end(), w.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        words.push_back(std::move(w));
    }
    return words;
}

std::vector<CveCandidate> search_cves_by_summary(const Wfn& assigned,
                                                 const CatalogSnapshot& snapshot,
                                                 const CveSearchOptions& options)
{
    const auto& sw_vendor = require_string(assigned.vendor(), "vendor");
    const auto& sw_product = require_string(assigned.product(), "product");
    const auto product_parts = part_count(sw_product);
    const auto vendor_parts = part_count(sw_vendor);

    auto similar = [&](const std::string& word, const std::string& target) {
        return levenshtein_within(word, target, options.max_distance).has_value();
    };

    std::vector<CveCandidate> out;
    for (const auto& cve : snapshot.cves()) {
        if (!cve.vuln_software.empty()) continue;
        auto words = summary_words(cve.summary);
        std::vector<std::string> candidates = words;
        add_joins(candidates, words, product_parts);
        if (vendor_parts != product_parts) add_joins(candidates, words, vendor_parts);

        bool hit = false;
        if (options.strict_single_word) {
            hit = std::any_of(candidates.begin(), candidates.end(), [&](const auto& w) {
                return similar(w, sw_product) && similar(w, sw_vendor);
            });
        } else {
            bool product_hit = std::any_of(candidates.begin(), candidates.end(),
                                           [&](const auto& w) { return similar(w, sw_product); });
            hit = product_hit && std::any_of(candidates.begin(), candidates.end(),
                                             [&](const auto& w) { return similar(w, sw_vendor); });
        }
        if (hit) out.push_back(CveCandidate{cve, CveOrigin::summary, {}, false});
    }
    sort_by_exact_then_id(out);
    return out;
}

std::vector<CveCandidate> merge_candidates(std::vector<CveCandidate> by_cpe,
                                           std::vector<CveCandidate> by_summary)
{
    std::map<std::string, CveCandidate> merged;
    for (auto& c : by_cpe) merged.insert_or_assign(c.cve.id, std::move(c));
    for (auto& c : by_summary) merged.try_emplace(c.cve.id, std::move(c));

    std::vector<CveCandidate> out;
    out.reserve(merged.size());
    for (auto& [id, c] : merged) out.push_back(std::move(c));
    auto tier = [](const CveCandidate& c) {
        if (c.origin == CveOrigin::summary) return 2;
        return c.exact_version ? 0 : 1;
    };
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        if (tier(a) != tier(b)) return tier(a) < tier(b);
        return cve_id_less(a.cve.id, b.cve.id);
    });
    return out;
}

std::vector<CveGroup> group_by_cpe(const std::vector<CveCandidate>& candidates)
{
    std::vector<CveGroup> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& c : candidates) {
        std::string key;
        std::vector<std::string> cpes;
        if (c.origin == CveOrigin::summary) {
            key = kSummaryGroupKey;
        } else {
            std::set<std::string> uris;
            for (const auto& m : c.matched_cpes) uris.insert(m.uri);
            cpes.assign(uris.begin(), uris.end());
            for (const auto& u : cpes) {
                if (!key.empty()) key.push_back('\n');
                key += u;
            }
        }
        auto [it, inserted] = index.try_emplace(key, groups.size());
        if (inserted) groups.push_back(CveGroup{key, std::move(cpes), {}});
        groups[it->second].members.push_back(c);
    }
    return groups;
}

std::string group_digest(std::string_view key)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::vector<CveCandidate> find_cve_candidates(const Wfn& assigned, const CatalogSnapshot& snapshot,
                                              const CveSearchOptions& options)
{
    return merge_candidates(search_cves_by_cpe(assigned, snapshot, options),
                            search_cves_by_summary(assigned, snapshot, options));
}

} // namespace iva
