#include "iva/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace iva {

namespace {

using ValueIndex = std::vector<std::pair<std::string, std::vector<std::size_t>>>;
using TokenIndex = std::vector<std::pair<std::string, std::size_t>>;

ValueIndex build_value_index(const std::vector<CpeDictEntry>& dict, Attribute a)
{
    std::map<std::string, std::vector<std::size_t>> grouped;
    for (std::size_t i = 0; i < dict.size(); ++i) {
        const auto& v = dict[i].wfn[a];
        if (v.is_string()) grouped[v.text()].push_back(i);
    }
    return {grouped.begin(), grouped.end()};
}

TokenIndex build_token_index(const ValueIndex& values)
{
    TokenIndex out;
    for (const auto& [value, entries] : values) {
        std::set<std::string> tokens{value};
        std::size_t start = 0;
        while (start <= value.size()) {
            auto pos = value.find('_', start);
            auto tok = value.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
            if (!tok.empty()) tokens.insert(tok);
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        for (const auto& tok : tokens) {
            for (auto idx : entries) out.emplace_back(tok, idx);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> token_lookup(const TokenIndex& index, std::string_view token)
{
    auto lo = std::lower_bound(index.begin(), index.end(), token,
                               [](const auto& p, std::string_view t) { return p.first < t; });
    std::vector<std::size_t> out;
    for (; lo != index.end() && lo->first == token; ++lo) out.push_back(lo->second);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> prefix_lookup(const ValueIndex& index, std::string_view prefix)
{
    auto lo = std::lower_bound(index.begin(), index.end(), prefix,
                               [](const auto& p, std::string_view t) { return p.first < t; });
    std::vector<std::size_t> out;
    for (; lo != index.end() && std::string_view(lo->first).starts_with(prefix); ++lo) {
        out.insert(out.end(), lo->second.begin(), lo->second.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool parse_cve_parts(std::string_view id, long& year, long& seq)
{
    if (!is_valid_cve_id(id)) return false;
    auto rest = id.substr(4);
    auto dash = rest.find('-');
    std::from_chars(rest.data(), rest.data() + dash, year);
    auto num = rest.substr(dash + 1);
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), seq);
    return ec == std::errc{};
}

} // namespace

bool is_valid_cve_id(std::string_view id)
{
    if (!id.starts_with("CVE-") || id.size() < 13) return false;
    auto rest = id.substr(4);
    if (rest.size() < 9 || rest[4] != '-') return false;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        if (i == 4) continue;
        if (!std::isdigit(static_cast<unsigned char>(rest[i]))) return false;
    }
    return true;
}

bool cve_id_less(std::string_view a, std::string_view b)
{
    long ya = 0, sa = 0, yb = 0, sb = 0;
    if (parse_cve_parts(a, ya, sa) && parse_cve_parts(b, yb, sb)) {
        if (ya != yb) return ya < yb;
        if (sa != sb) return sa < sb;
    }
    return a < b;
}

CatalogSnapshot CatalogSnapshot::build(std::vector<CpeDictEntry> dictionary,
                                       std::vector<CveEntry> cves, std::string snapshot_time)
{
    CatalogSnapshot s;
    s.dictionary_ = std::move(dictionary);
    s.cves_ = std::move(cves);
    s.snapshot_time_ = std::move(snapshot_time);

    for (std::size_t i = 0; i < s.cves_.size(); ++i) {
        auto [it, inserted] = s.cve_by_id_.emplace(s.cves_[i].id, i);
        if (!inserted) throw DuplicateCveId("duplicate CVE id " + s.cves_[i].id);
    }
    for (std::size_t i = 0; i < s.dictionary_.size(); ++i) {
        const auto& e = s.dictionary_[i];
        // First occurrence wins for lookups; duplicates stay in the entry list.
        s.entry_by_uri_.emplace(e.uri, i);
        if (e.deprecated && e.deprecated_by) s.deprecation_map_.emplace(e.uri, *e.deprecated_by);
    }
    s.vendor_values_ = build_value_index(s.dictionary_, Attribute::vendor);
    s.product_values_ = build_value_index(s.dictionary_, Attribute::product);
    s.vendor_tokens_ = build_token_index(s.vendor_values_);
    s.product_tokens_ = build_token_index(s.product_values_);
    return s;
}

const CpeDictEntry* CatalogSnapshot::find_entry(std::string_view uri) const
{
    auto it = entry_by_uri_.find(std::string(uri));
    return it == entry_by_uri_.end() ? nullptr : &dictionary_[it->second];
}

const CveEntry* CatalogSnapshot::find_cve(std::string_view id) const
{
    auto it = cve_by_id_.find(std::string(id));
    return it == cve_by_id_.end() ? nullptr : &cves_[it->second];
}

const CpeDictEntry* CatalogSnapshot::resolve_deprecation(const CpeDictEntry& entry) const
{
    const CpeDictEntry* current = &entry;
    std::set<std::string_view> visited;
    while (current->deprecated) {
        if (!visited.insert(current->uri).second) return nullptr;
        if (!current->deprecated_by) return nullptr;
        current = find_entry(*current->deprecated_by);
        if (current == nullptr) return nullptr;
    }
    return current;
}

std::vector<std::size_t> CatalogSnapshot::lookup_vendor_token(std::string_view token) const
{
    return token_lookup(vendor_tokens_, token);
}

std::vector<std::size_t> CatalogSnapshot::lookup_product_token(std::string_view token) const
{
    return token_lookup(product_tokens_, token);
}

std::vector<std::size_t> CatalogSnapshot::lookup_vendor_prefix(std::string_view prefix) const
{
    return prefix_lookup(vendor_values_, prefix);
}

std::vector<std::size_t> CatalogSnapshot::lookup_product_prefix(std::string_view prefix) const
{
    return prefix_lookup(product_values_, prefix);
}

} // namespace iva
