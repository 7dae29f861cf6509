#pragma once

#include "iva/cpe_name.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace iva {

struct CpeDictEntry {
    std::string uri;
    std::optional<std::string> formatted;
    std::string title;
    Wfn wfn;
    bool deprecated = false;
    std::optional<std::string> deprecated_by;
    /// Declared reason (e.g. NAME_CORRECTION); empty when the dictionary gives none.
    std::string deprecation_reason;

    friend bool operator==(const CpeDictEntry&, const CpeDictEntry&) = default;
};

struct VulnerableCpe {
    std::string uri;
    Wfn wfn;

    friend bool operator==(const VulnerableCpe&, const VulnerableCpe&) = default;
};

struct CveEntry {
    std::string id;
    std::string summary;
    std::string published;
    std::optional<double> cvss_score;
    std::vector<VulnerableCpe> vuln_software;

    friend bool operator==(const CveEntry&, const CveEntry&) = default;
};

/// True for ids of the form CVE-YYYY-NNNN[N...].
bool is_valid_cve_id(std::string_view id);

/// Orders CVE ids by (year, sequence number) numerically; falls back to text.
bool cve_id_less(std::string_view a, std::string_view b);

class DuplicateCveId : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable indexed view of one dictionary plus one CVE feed set.
class CatalogSnapshot {
public:
    CatalogSnapshot() = default;

    /// Throws DuplicateCveId.
    static CatalogSnapshot build(std::vector<CpeDictEntry> dictionary, std::vector<CveEntry> cves,
                                 std::string snapshot_time);

    std::span<const CpeDictEntry> dictionary() const noexcept { return dictionary_; }
    std::span<const CveEntry> cves() const noexcept { return cves_; }
    const std::string& snapshot_time() const noexcept { return snapshot_time_; }

    /// Direct deprecated URI -> replacement URI links.
    const std::map<std::string, std::string>& deprecation_map() const noexcept
    {
        return deprecation_map_;
    }

    const CpeDictEntry* find_entry(std::string_view uri) const;
    const CveEntry* find_cve(std::string_view id) const;

    /// Follows deprecated_by links to the first non-deprecated entry. Returns
    /// nullptr when the chain dangles or cycles.
    const CpeDictEntry* resolve_deprecation(const CpeDictEntry& entry) const;

    /// Distinct STRING vendor / product values with the indices of the
    /// entries carrying them.
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& vendor_values() const noexcept
    {
        return vendor_values_;
    }
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& product_values() const noexcept
    {
        return product_values_;
    }

    /// Entries whose vendor (product) value contains `token` as a whole
    /// underscore-separated token or is equal to it.
    std::vector<std::size_t> lookup_vendor_token(std::string_view token) const;
    std::vector<std::size_t> lookup_product_token(std::string_view token) const;

    /// Entries whose vendor (product) value starts with `prefix`.
    std::vector<std::size_t> lookup_vendor_prefix(std::string_view prefix) const;
    std::vector<std::size_t> lookup_product_prefix(std::string_view prefix) const;

    friend bool operator==(const CatalogSnapshot& a, const CatalogSnapshot& b)
    {
        return a.snapshot_time_ == b.snapshot_time_ && a.dictionary_ == b.dictionary_ &&
               a.cves_ == b.cves_;
    }

private:
    using ValueIndex = std::vector<std::pair<std::string, std::vector<std::size_t>>>;
    using TokenIndex = std::vector<std::pair<std::string, std::size_t>>;

    std::vector<CpeDictEntry> dictionary_;
    std::vector<CveEntry> cves_;
    std::string snapshot_time_;
    std::map<std::string, std::string> deprecation_map_;
    std::unordered_map<std::string, std::size_t> entry_by_uri_;
    std::unordered_map<std::string, std::size_t> cve_by_id_;
    ValueIndex vendor_values_;
    ValueIndex product_values_;
    TokenIndex vendor_tokens_;
    TokenIndex product_tokens_;
};

} // namespace iva
