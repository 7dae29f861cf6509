#pragma once

#include "iva/cpe_name.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iva {

/// One version component: numeric when it is all digits, text otherwise.
struct VersionSegment {
    std::string text;
    std::optional<std::uint64_t> number;

    /// Numeric segments compare by value ("07" == "7"), anything else by text.
    friend bool operator==(const VersionSegment& a, const VersionSegment& b)
    {
        if (a.number && b.number) return *a.number == *b.number;
        return a.text == b.text;
    }
};

struct VersionKey {
    enum class Scheme { year, dotted, opaque };

    Scheme scheme = Scheme::opaque;
    std::vector<VersionSegment> components;
    /// Lowercased input text.
    std::string raw;
};

/// "2008" -> YEAR [2008]; "1.2.49" -> DOTTED [1, 2, 49]; anything else -> OPAQUE [raw].
VersionKey parse_version(std::string_view text);

/// Number of equal leading components.
std::size_t common_prefix_length(const VersionKey& a, const VersionKey& b);

/// How a CVE CPE version relates to a product version.
enum class VersionRelation {
    none,          ///< not the same version
    any_version,   ///< the CVE CPE leaves the version as ANY
    exact,         ///< verbatim equal
    wildcard,      ///< equal under '*' / '?' pattern matching
    main_version,  ///< only the first components agree
};

/// exact and wildcard relations count as exact version matches.
inline bool is_exact(VersionRelation r)
{
    return r == VersionRelation::exact || r == VersionRelation::wildcard;
}

VersionRelation relate_versions(const VersionKey& product_version, const AttributeValue& cve_version);

/// True iff relate_versions(...) != none.
bool same_version(const VersionKey& product_version, const AttributeValue& cve_version);

/// Glob match where '*' spans any run of characters and '?' one character.
bool wildcard_match(std::string_view pattern, std::string_view text);

} // namespace iva
