#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace iva {

/// A software product as reported by an inventory source.
struct InventoryProduct {
    std::string external_id;
    std::string vendor_raw;
    std::string product_raw;
    std::string version_raw;
};

class EmptyProduct : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SearchTerms {
    std::vector<std::string> vendor_terms;
    std::vector<std::string> product_terms;

    friend bool operator==(const SearchTerms&, const SearchTerms&) = default;
};

/// Splits vendor and product on whitespace, lowercases, and builds
/// underscore-joined terms:
///   1. joins of every leading run of tokens, longest first (down to the first
///      token alone);
///   2. for the product, when vendor tokens occur in it, the same leading-run
///      joins (length >= 2) of the product tokens with vendor tokens removed;
///   3. the remaining single tokens: words by decreasing length, then
///      version-like tokens (leading digit) in input order.
/// Duplicates are dropped, keeping the first occurrence.
///
/// "Microsoft Corporation" / "Microsoft .NET Framework 4.5.2" gives
///   vendor:  microsoft_corporation, microsoft, corporation
///   product: microsoft_.net_framework_4.5.2, microsoft_.net_framework,
///            microsoft_.net, microsoft, .net_framework_4.5.2, .net_framework,
///            framework, .net, 4.5.2
///
/// Throws EmptyProduct when product_raw is blank.
SearchTerms generate_search_terms(const InventoryProduct& product);

/// True for terms made only of digits and dots with a leading digit ("4.5.2", "112").
bool is_version_like(const std::string& term);

} // namespace iva
