#include "doctest.h"
#include "fixtures.hpp"

#include "iva/feed_parser.hpp"
#include "iva/snapshot_io.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace iva;
using iva::testing::open_fixture;

TEST_CASE("dictionary: entries plus skips account for every item")
{
    auto in = open_fixture("dictionary.xml");
    auto r = parse_cpe_dictionary(in);
    CHECK(r.items_seen == r.entries.size() + r.skipped.size());
    CHECK(r.skipped.size() == 1);
    CHECK(r.skipped[0].item == "cpe:/q:broken:entry:1.0");

    const auto& ff = r.entries.front();
    CHECK(ff.uri == "cpe:/a:mozilla:firefox:38.0");
    CHECK(ff.title == "Mozilla Firefox 38.0");
    REQUIRE(ff.formatted.has_value());
    CHECK(*ff.formatted == "cpe:2.3:a:mozilla:firefox:38.0:*:*:*:*:*:*:*");
    CHECK(ff.wfn == unbind_uri("cpe:/a:mozilla:firefox:38.0"));
    CHECK_FALSE(ff.deprecated);
}

TEST_CASE("dictionary: deprecation metadata")
{
    auto snap = testing::load_fixture_snapshot();
    const auto* old = snap.find_entry("cpe:/a:adobe:flash_playe_for_linux:9.0.115.0");
    REQUIRE(old != nullptr);
    CHECK(old->deprecated);
    CHECK(old->deprecated_by == "cpe:/a:adobe:flash_player_for_linux:9.0.115.0");
    CHECK(old->deprecation_reason == "NAME_CORRECTION");
    CHECK(snap.deprecation_map().at(old->uri) == *old->deprecated_by);

    const auto* target = snap.resolve_deprecation(*old);
    REQUIRE(target != nullptr);
    CHECK(target->uri == "cpe:/a:adobe:flash_player_for_linux:9.0.115.0");
}

TEST_CASE("dictionary: chains resolve transitively and dangling chains do not")
{
    auto mk = [](std::string uri, std::optional<std::string> by) {
        CpeDictEntry e;
        e.uri = uri;
        e.wfn = unbind_uri(uri);
        e.deprecated = by.has_value();
        e.deprecated_by = std::move(by);
        return e;
    };
    std::vector<CpeDictEntry> dict{
        mk("cpe:/a:v:a:1", "cpe:/a:v:b:1"), mk("cpe:/a:v:b:1", "cpe:/a:v:c:1"), mk("cpe:/a:v:c:1", {}),
        mk("cpe:/a:v:d:1", "cpe:/a:v:gone:1"), mk("cpe:/a:v:e:1", "cpe:/a:v:f:1"),
        mk("cpe:/a:v:f:1", "cpe:/a:v:e:1"),
    };
    auto snap = CatalogSnapshot::build(dict, {}, "t");
    CHECK(snap.resolve_deprecation(*snap.find_entry("cpe:/a:v:a:1"))->uri == "cpe:/a:v:c:1");
    CHECK(snap.resolve_deprecation(*snap.find_entry("cpe:/a:v:c:1"))->uri == "cpe:/a:v:c:1");
    CHECK(snap.resolve_deprecation(*snap.find_entry("cpe:/a:v:d:1")) == nullptr);
    CHECK(snap.resolve_deprecation(*snap.find_entry("cpe:/a:v:e:1")) == nullptr);
}

TEST_CASE("CVE feed: entries, skips and fields")
{
    auto in = open_fixture("cve_feed.xml");
    auto r = parse_cve_feed(in);
    CHECK(r.entries_seen == r.entries.size() + r.skipped.size());
    CHECK(r.entries.size() == 10);
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].item == "BOGUS-1");
    REQUIRE(r.skipped_cpes.size() == 1);
    CHECK(r.skipped_cpes[0].item == "CVE-2016-7777 cpe:/z:bad:uri");

    const auto& win = r.entries.front();
    CHECK(win.id == "CVE-2016-0006");
    CHECK(win.vuln_software.size() == 10);
    CHECK(win.published == "2016-01-13T00:59:00.113-05:00");
    REQUIRE(win.cvss_score.has_value());
    CHECK(*win.cvss_score == doctest::Approx(7.2));
    CHECK(win.summary.starts_with("The sandbox implementation in Microsoft Windows Vista SP2"));
    CHECK(win.vuln_software[2].wfn.update().text() == "sp1");

    auto it = std::find_if(r.entries.begin(), r.entries.end(),
                           [](const auto& e) { return e.id == "CVE-2016-9748"; });
    REQUIRE(it != r.entries.end());
    CHECK(it->vuln_software.empty());
    CHECK_FALSE(it->cvss_score.has_value());
    // Whitespace inside the summary is normalised to single spaces.
    CHECK(it->summary.find("scripting. This vulnerability") != std::string::npos);
}

TEST_CASE("CVE feed: duplicate ids are rejected at snapshot build")
{
    CveEntry a{"CVE-2016-0001", "x", "", std::nullopt, {}};
    CHECK_THROWS_AS(CatalogSnapshot::build({}, {a, a}, "t"), DuplicateCveId);
}

TEST_CASE("malformed and empty documents")
{
    std::istringstream broken("<cpe-list><cpe-item name='cpe:/a:x:y'></cpe-list>");
    CHECK_THROWS_AS(parse_cpe_dictionary(broken), DocumentError);
    std::istringstream empty("");
    CHECK_THROWS_AS(parse_cve_feed(empty), DocumentError);
    std::istringstream no_items("<?xml version='1.0'?><nvd/>");
    auto r = parse_cve_feed(no_items);
    CHECK(r.entries.empty());
    CHECK(r.entries_seen == 0);

    std::ifstream missing("/nonexistent/feed.xml");
    CHECK_THROWS_AS(parse_cve_feed(missing), StreamError);
}

TEST_CASE("parsing is deterministic")
{
    auto a = testing::load_fixture_snapshot();
    auto b = testing::load_fixture_snapshot();
    CHECK(a == b);
}

TEST_CASE("cve id ordering is numeric")
{
    CHECK(cve_id_less("CVE-2016-9999", "CVE-2016-10000"));
    CHECK(cve_id_less("CVE-2015-9999", "CVE-2016-0001"));
    CHECK_FALSE(cve_id_less("CVE-2016-10000", "CVE-2016-9999"));
    CHECK(is_valid_cve_id("CVE-2016-0006"));
    CHECK(is_valid_cve_id("CVE-2016-10000"));
    CHECK_FALSE(is_valid_cve_id("CVE-16-0006"));
    CHECK_FALSE(is_valid_cve_id("BOGUS-1"));
}

TEST_CASE("snapshot save/load round-trip")
{
    testing::TempDir dir("snap");
    auto snap = testing::load_fixture_snapshot();
    save_snapshot(snap, dir.path());
    auto loaded = load_snapshot(dir.path());
    CHECK(loaded == snap);
    CHECK(loaded.find_entry("cpe:/a:adobe:flash_playe_for_linux:9.0.115.0") != nullptr);

    // Same snapshot, same bytes.
    testing::TempDir dir2("snap2");
    save_snapshot(loaded, dir2.path());
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (auto name : {"manifest.json", "dictionary.jsonl", "cves.jsonl"}) {
        CHECK(slurp(dir.path() / name) == slurp(dir2.path() / name));
    }
}

TEST_CASE("snapshot load rejects bad layouts")
{
    testing::TempDir dir("badsnap");
    CHECK_THROWS_AS(load_snapshot(dir.path()), SnapshotFormatError);

    save_snapshot(testing::load_fixture_snapshot(), dir.path());
    {
        std::ofstream m(dir.path() / "manifest.json", std::ios::trunc);
        m << R"({"format":"iva-catalog-snapshot","layout_version":99,"snapshot_time":"t",)"
          << R"("dictionary_entries":0,"cve_entries":0})";
    }
    CHECK_THROWS_AS(load_snapshot(dir.path()), SnapshotFormatError);

    save_snapshot(testing::load_fixture_snapshot(), dir.path());
    {
        std::ofstream c(dir.path() / "cves.jsonl", std::ios::app);
        c << "{not json\n";
    }
    CHECK_THROWS_AS(load_snapshot(dir.path()), SnapshotFormatError);
}

namespace {

bool has_token(const std::string& value, std::string_view token)
{
    if (value == token) return true;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto end = value.find('_', start);
        if (end == std::string::npos) end = value.size();
        if (std::string_view(value).substr(start, end - start) == token) return true;
        start = end + 1;
    }
    return false;
}

} // namespace

TEST_CASE("token and prefix indexes agree with a linear scan")
{
    std::mt19937_64 rng(7);
    const std::vector<std::string> words{"adobe", "flash", "player", "air", "sdk", "mozilla", "fire", "fox", "x"};
    auto word = [&] { return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)]; };
    auto name = [&] {
        std::string s = word();
        int extra = std::uniform_int_distribution<int>(0, 2)(rng);
        for (int i = 0; i < extra; ++i) s += "_" + word();
        return s;
    };

    for (int round = 0; round < 20; ++round) {
        std::vector<CpeDictEntry> dict;
        for (int i = 0; i < 40; ++i) {
            Wfn w;
            w.set(Attribute::part, AttributeValue::str("a"))
                .set(Attribute::vendor, AttributeValue::str(name()))
                .set(Attribute::product, AttributeValue::str(name()))
                .set(Attribute::version, AttributeValue::str(std::to_string(i)));
            CpeDictEntry e;
            e.uri = bind_to_uri(w);
            e.wfn = w;
            dict.push_back(std::move(e));
        }
        auto snap = CatalogSnapshot::build(dict, {}, "t");

        std::vector<std::string> probes(words);
        probes.insert(probes.end(), {"flash_player", "fla", "", "zzz", "player_air"});
        for (const auto& probe : probes) {
            CAPTURE(probe);
            std::vector<std::size_t> vendor_tok, product_tok, vendor_pre, product_pre;
            for (std::size_t i = 0; i < snap.dictionary().size(); ++i) {
                const auto& w = snap.dictionary()[i].wfn;
                auto v = w[Attribute::vendor].text();
                auto p = w[Attribute::product].text();
                if (!probe.empty() && has_token(v, probe)) vendor_tok.push_back(i);
                if (!probe.empty() && has_token(p, probe)) product_tok.push_back(i);
                if (v.starts_with(probe)) vendor_pre.push_back(i);
                if (p.starts_with(probe)) product_pre.push_back(i);
            }
            auto sorted = [](std::vector<std::size_t> v) {
                std::sort(v.begin(), v.end());
                return v;
            };
            if (!probe.empty()) {
                CHECK(sorted(snap.lookup_vendor_token(probe)) == vendor_tok);
                CHECK(sorted(snap.lookup_product_token(probe)) == product_tok);
            }
            CHECK(sorted(snap.lookup_vendor_prefix(probe)) == vendor_pre);
            CHECK(sorted(snap.lookup_product_prefix(probe)) == product_pre);
        }
    }
}
