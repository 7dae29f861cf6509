#include "iva/version.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace iva {

namespace {

bool all_digits(std::string_view s)
{
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

VersionSegment make_segment(std::string_view s)
{
    VersionSegment seg{std::string(s), std::nullopt};
    if (all_digits(s) && s.size() <= 19) {
        std::uint64_t v = 0;
        std::from_chars(s.data(), s.data() + s.size(), v);
        seg.number = v;
    }
    return seg;
}

bool has_wildcard(std::string_view s)
{
    return s.find_first_of("*?") != std::string_view::npos;
}

} // namespace

VersionKey parse_version(std::string_view text)
{
    VersionKey key;
    key.raw.resize(text.size());
    std::transform(text.begin(), text.end(), key.raw.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string_view raw = key.raw;

    if (raw.size() == 4 && all_digits(raw)) {
        auto seg = make_segment(raw);
        if (*seg.number >= 1900 && *seg.number <= 2099) {
            key.scheme = VersionKey::Scheme::year;
            key.components.push_back(std::move(seg));
            return key;
        }
    }
    if (raw.find('.') != std::string_view::npos) {
        std::vector<VersionSegment> parts;
        bool numeric = false;
        std::size_t start = 0;
        while (true) {
            auto pos = raw.find('.', start);
            auto part = raw.substr(start, pos == std::string_view::npos ? pos : pos - start);
            parts.push_back(make_segment(part));
            numeric = numeric || parts.back().number.has_value();
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        if (numeric) {
            key.scheme = VersionKey::Scheme::dotted;
            key.components = std::move(parts);
            return key;
        }
    }
    key.scheme = VersionKey::Scheme::opaque;
    key.components.push_back(VersionSegment{key.raw, std::nullopt});
    return key;
}

std::size_t common_prefix_length(const VersionKey& a, const VersionKey& b)
{
    std::size_t n = 0;
    while (n < a.components.size() && n < b.components.size() &&
           !a.components[n].text.empty() && a.components[n] == b.components[n]) {
        ++n;
    }
    return n;
}

bool wildcard_match(std::string_view pattern, std::string_view text)
{
    // Iterative glob with single-star backtracking.
    std::size_t p = 0, t = 0;
    std::size_t star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

VersionRelation relate_versions(const VersionKey& product_version, const AttributeValue& cve_version)
{
    if (cve_version.is_any()) return VersionRelation::any_version;
    if (cve_version.is_na()) return VersionRelation::none;

    const auto& cve_text = cve_version.text();
    const auto& sw_text = product_version.raw;
    if (sw_text.empty()) return VersionRelation::none;
    if (cve_text == sw_text) return VersionRelation::exact;
    if ((has_wildcard(cve_text) && wildcard_match(cve_text, sw_text)) ||
        (has_wildcard(sw_text) && wildcard_match(sw_text, cve_text))) {
        return VersionRelation::wildcard;
    }
    auto cve_key = parse_version(cve_text);
    const auto& a = product_version.components.front();
    const auto& b = cve_key.components.front();
    if (!a.text.empty() && !has_wildcard(a.text) && a == b) return VersionRelation::main_version;
    return VersionRelation::none;
}

bool same_version(const VersionKey& product_version, const AttributeValue& cve_version)
{
    return relate_versions(product_version, cve_version) != VersionRelation::none;
}

} // namespace iva
