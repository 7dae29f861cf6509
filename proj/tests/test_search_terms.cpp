#include "doctest.h"

#include "iva/search_terms.hpp"

#include <algorithm>
#include <cctype>
#include <set>

using namespace iva;

using Terms = std::vector<std::string>;

TEST_CASE("Microsoft .NET Framework terms")
{
    auto t = generate_search_terms({"", "Microsoft Corporation", "Microsoft .NET Framework 4.5.2", "4.5.51209"});
    CHECK(t.vendor_terms == Terms{"microsoft_corporation", "microsoft", "corporation"});
    CHECK(t.product_terms == Terms{"microsoft_.net_framework_4.5.2", "microsoft_.net_framework", "microsoft_.net",
                                   "microsoft", ".net_framework_4.5.2", ".net_framework", "framework", ".net",
                                   "4.5.2"});
}

TEST_CASE("single-word inputs")
{
    auto t = generate_search_terms({"", "Wireshark", "Wireshark", "2.0.0"});
    CHECK(t.vendor_terms == Terms{"wireshark"});
    CHECK(t.product_terms == Terms{"wireshark"});

    auto air = generate_search_terms({"", "Adobe Systems Incorporated", "Adobe AIR", "20.0.0.260"});
    CHECK(air.vendor_terms ==
          Terms{"adobe_systems_incorporated", "adobe_systems", "adobe", "incorporated", "systems"});
    CHECK(air.product_terms == Terms{"adobe_air", "adobe", "air"});
}

TEST_CASE("empty vendor yields no vendor terms")
{
    auto t = generate_search_terms({"", "   ", "SeaMonkey", "2.35"});
    CHECK(t.vendor_terms.empty());
    CHECK(t.product_terms == Terms{"seamonkey"});
}

TEST_CASE("blank product is rejected")
{
    CHECK_THROWS_AS(generate_search_terms({"", "Mozilla", "  \t", "1"}), EmptyProduct);
}

TEST_CASE("property: terms are lowercase, whitespace-free and unique")
{
    for (auto* product : {"Mozilla Firefox 52.0 (x86 en-US)", "Java SE Development Kit 8 Update 112",
                          "MySQL Server 5.7", "A  a A"}) {
        auto t = generate_search_terms({"", "Oracle  Corporation", product, ""});
        for (const auto* list : {&t.vendor_terms, &t.product_terms}) {
            std::set<std::string> seen;
            for (const auto& term : *list) {
                CHECK_FALSE(term.empty());
                CHECK(term.find_first_of(" \t") == std::string::npos);
                CHECK(std::none_of(term.begin(), term.end(), [](unsigned char c) { return std::isupper(c); }));
                CHECK(seen.insert(term).second);
            }
        }
    }
}

TEST_CASE("is_version_like")
{
    CHECK(is_version_like("4.5.2"));
    CHECK(is_version_like("112"));
    CHECK_FALSE(is_version_like(".net"));
    CHECK_FALSE(is_version_like("x86"));
    CHECK_FALSE(is_version_like("8u112"));
}
