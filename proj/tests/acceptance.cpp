// Acceptance suite: one PASS/FAIL line per criterion. Everything that the
// command line exposes is driven through run_cli; the Levenshtein and CVE
// search oracles call the library directly.

#include "cve_oracle.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

#include "iva/cli.hpp"
#include "iva/cve_matcher.hpp"
#include "iva/json_io.hpp"
#include "iva/levenshtein.hpp"
#include "iva/snapshot_io.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace iva;
using nlohmann::json;
using testing::fixture_path;
using testing::TempDir;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, '\t');) out.push_back(f);
    return out;
}

std::vector<json> json_lines(const std::string& text)
{
    std::vector<json> out;
    for (const auto& l : lines(text)) out.push_back(json::parse(l));
    return out;
}

// Thrown by expect() with a short explanation of the first failed check.
struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what)
{
    if (!ok) throw Failure{what};
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string ingest(const std::filesystem::path& out, const std::string& dict, const std::string& feed)
{
    auto r = cli({"feeds", "ingest", "--cpe-dict", fixture_path(dict).string(), "--cve-feed",
                  fixture_path(feed).string(), "--out", out.string(), "--snapshot-time", "2017-02-14T00:00:00Z"});
    expect(r.code == 0, "feeds ingest failed: " + r.err);
    return out.string();
}

// -- criteria ----------------------------------------------------------------

void packed_uri_conversion()
{
    auto t0 = std::chrono::steady_clock::now();
    auto r = cli({"--format", "json", "cpe", "convert", "--from", "uri", "--to", "wfn",
                  "cpe:/a:microsoft:internet_explorer:8.*::en~-~~windows~x86~"});
    expect(r.code == 0, "exit code " + std::to_string(r.code));
    auto wfn = json::parse(r.out)["wfn"];
    const json expected{{"part", "a"},          {"vendor", "microsoft"}, {"product", "internet_explorer"},
                        {"version", "8.*"},     {"update", "ANY"},       {"language", "en"},
                        {"edition", "NA"},      {"sw_edition", "ANY"},   {"target_sw", "windows"},
                        {"target_hw", "x86"},   {"other", "ANY"}};
    for (const auto& [k, v] : expected.items()) {
        expect(wfn[k] == v, k + " = " + wfn[k].dump() + ", expected " + v.dump());
    }
    expect(wfn.size() == 11, "attribute count");
    auto text = cli({"cpe", "convert", "--from", "uri", "--to", "wfn",
                     "cpe:/a:microsoft:internet_explorer:8.*::en~-~~windows~x86~"});
    expect(text.out ==
               "part:a, vendor:microsoft, product:internet_explorer, version:8.*, update:ANY, edition:NA, "
               "language:en, sw_edition:ANY, target_sw:windows, target_hw:x86, other:ANY\n",
           "text form: " + text.out);
    auto s = seconds_since(t0);
    expect(s < 1.0, "took " + std::to_string(s) + " s");
}

void dotnet_search_terms()
{
    auto r = cli({"--format", "json", "match", "terms", "--vendor", "Microsoft Corporation", "--product",
                  "Microsoft .NET Framework 4.5.2", "--version", "4.5.51209"});
    expect(r.code == 0, "exit code");
    auto j = json::parse(r.out);
    const std::vector<std::string> vendor{"microsoft_corporation", "microsoft", "corporation"};
    const std::vector<std::string> product{"microsoft_.net_framework_4.5.2", "microsoft_.net_framework",
                                           "microsoft_.net", "microsoft", ".net_framework_4.5.2", ".net_framework",
                                           "framework", ".net", "4.5.2"};
    expect(j["vendor_terms"].get<std::vector<std::string>>() == vendor, "vendor terms " + j["vendor_terms"].dump());
    expect(j["product_terms"].get<std::vector<std::string>>() == product,
           "product terms " + j["product_terms"].dump());
}

void binding_round_trips()
{
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1000);
    for (int i = 0; i < 1000; ++i) {
        auto wfn = testing::random_wfn(rng);
        auto uri = bind_to_uri(wfn);
        auto fs = bind_to_formatted_string(wfn);
        for (const auto& [from, name] : {std::pair{"uri", uri}, std::pair{"fs", fs}}) {
            auto r = cli({"--format", "json", "cpe", "convert", "--from", from, "--to", "wfn", name});
            expect(r.code == 0, std::string(from) + " " + name + ": " + r.err);
            auto j = json::parse(r.out);
            expect(wfn_from_json(j["wfn"]) == wfn, std::string(from) + " round trip of " + name);
            expect(j["uri"] == uri && j["fs"] == fs, "rebinding of " + name);
        }
    }
    auto s = seconds_since(t0);
    expect(s < 5.0, "took " + std::to_string(s) + " s");
}

void levenshtein_oracle()
{
    std::mt19937_64 rng(10000);
    std::uniform_int_distribution<std::size_t> len(0, 30);
    std::uniform_int_distribution<int> ch(0, 5);  // small alphabet, many near-misses
    for (int i = 0; i < 10000; ++i) {
        std::string a(len(rng), 'a'), b(len(rng), 'a');
        for (auto& c : a) c = static_cast<char>('a' + ch(rng));
        for (auto& c : b) c = static_cast<char>('a' + ch(rng));
        auto want = testing::oracle_distance(a, b);
        expect(levenshtein(a, b) == want, "distance(" + a + ", " + b + ")");
        auto within = levenshtein_within(a, b, 2);
        expect(within.has_value() == (want <= 2) && (!within || *within == want), "bounded(" + a + ", " + b + ")");
    }
    expect(levenshtein("player", "playe") == 1, "player/playe");
    auto pj = levenshtein("player", "joomla");
    expect(pj == testing::oracle_distance("player", "joomla") && pj <= 6, "player/joomla = " + std::to_string(pj));
}

void deprecation_transparency(const std::string& snap)
{
    auto r = cli({"match", "cpe", "--vendor", "Adobe", "--product", "Flash Playe for Linux", "--version", "9.0.115.0",
                  "--snapshot", snap});
    expect(r.code == 0, "exit code");
    auto ls = lines(r.out);
    expect(!ls.empty(), "no candidates");
    expect(fields(ls[0])[1] == "cpe:/a:adobe:flash_player_for_linux:9.0.115.0", "first candidate " + ls[0]);
    expect(r.out.find("flash_playe_for_linux") == std::string::npos, "deprecated entry listed");
}

void mysql_ranking(const std::string& snap)
{
    auto r = cli({"match", "cpe", "--vendor", "Oracle Corporation", "--product", "MySQL Server", "--version",
                  "5.7.15", "--snapshot", snap});
    expect(r.code == 0, "exit code");
    std::size_t rank = 0;
    for (const auto& l : lines(r.out)) {
        auto f = fields(l);
        if (f.at(1) == "cpe:/a:oracle:mysql:5.7.15") rank = std::stoul(f[0]);
    }
    expect(rank >= 1 && rank <= 3, "rank " + std::to_string(rank));
}

void cpe_list_search_oracle()
{
    auto t0 = std::chrono::steady_clock::now();
    TempDir dir("accept-cpe-search");
    std::mt19937_64 rng(20);
    for (int round = 0; round < 20; ++round) {
        auto snap = testing::random_cve_snapshot(rng, 50);
        auto path = dir.path() / std::to_string(round);
        save_snapshot(snap, path);
        for (int q = 0; q < 10; ++q) {
            auto assigned = testing::random_assigned(rng);
            auto expected = testing::oracle_search_by_cpe(assigned, snap, 2);

            auto r = cli({"--format", "json", "match", "cve", "--cpe", bind_to_uri(assigned), "--snapshot",
                          path.string()});
            expect(r.code == 0, "match cve: " + r.err);
            std::set<testing::Triple> got;
            for (const auto& j : json_lines(r.out)) {
                if (j["origin"] != "CPE_LIST") continue;
                got.emplace(j["cve_id"].get<std::string>(), j["exact_version"].get<bool>(),
                            j["matched_cpes"].get<std::vector<std::string>>());
            }
            expect(got == expected, "round " + std::to_string(round) + " query " + bind_to_uri(assigned));
            expect(testing::as_triples(search_cves_by_cpe(assigned, snap)) == expected,
                   "library round " + std::to_string(round));
        }
    }
    auto s = seconds_since(t0);
    expect(s < 10.0, "took " + std::to_string(s) + " s");
}

void summary_search_fallback(const std::string& snap)
{
    const std::string cpe = "cpe:/a:ibm:rational_doors_next_generation:5.0";
    auto loaded = load_snapshot(snap);
    auto assigned = unbind_uri(cpe);
    auto by_cpe = search_cves_by_cpe(assigned, loaded);
    for (const auto& c : by_cpe) expect(c.cve.id != "CVE-2016-9748", "found by CPE-list search");
    auto by_summary = search_cves_by_summary(assigned, loaded);
    expect(std::any_of(by_summary.begin(), by_summary.end(),
                       [](const auto& c) { return c.cve.id == "CVE-2016-9748"; }),
           "missed by summary search");

    auto r = cli({"match", "cve", "--cpe", cpe, "--snapshot", snap});
    expect(r.code == 0, "exit code");
    std::size_t hits = 0;
    for (const auto& l : lines(r.out)) {
        auto f = fields(l);
        if (f[0] == "CVE-2016-9748") {
            ++hits;
            expect(f[1] == "SUMMARY", "origin " + f[1]);
        }
    }
    expect(hits == 1, "merged result holds it " + std::to_string(hits) + " times");
}

void same_version_table()
{
    struct Row {
        const char* have;
        const char* cve;
        const char* relation;
        const char* same;
        const char* exact;
    };
    const Row rows[] = {
        {"1.2.3", "1.2.*", "WILDCARD", "true", "true"},
        {"1.2.3.5256", "1.2.*", "WILDCARD", "true", "true"},
        {"2.35", "2.46", "MAIN_VERSION", "true", "false"},
    };
    for (const auto& row : rows) {
        auto r = cli({"match", "version", "--product-version", row.have, "--cve-version", row.cve});
        expect(r.code == 0, "exit code");
        auto f = fields(lines(r.out).at(0));
        expect(f == std::vector<std::string>{row.relation, row.same, row.exact},
               std::string(row.have) + " vs " + row.cve + ": " + r.out);
    }
}

class Store {
public:
    Store(const std::string& snapshot, const std::filesystem::path& dir, const std::string& name)
        : snapshot_(snapshot), store_((dir / name).string())
    {
    }

    Run operator()(std::vector<std::string> args) const
    {
        args.insert(args.begin(), {"--store", store_, "--snapshot", snapshot_});
        return cli(args);
    }

    std::map<std::int64_t, std::string> states(const std::string& product) const
    {
        std::map<std::int64_t, std::string> out;
        for (const auto& j : json_lines((*this)({"--format", "json", "alerts", product}).out)) {
            out[j["id"].get<std::int64_t>()] = j["state"].get<std::string>();
        }
        return out;
    }

private:
    std::string snapshot_;
    std::string store_;
};

constexpr const char* kInventory =
    "external_id,vendor,product,version\n"
    "p1,Mozilla,SeaMonkey,2.35\n"
    "p2,\"The Wireshark developer community, https://www.wireshark.org\",Wireshark 2.0.0 (32-bit),2.0.0\n";

void triage_state_machine(const std::string& snap)
{
    TempDir dir("accept-triage");
    auto inventory = dir.path() / "inventory.csv";
    std::ofstream(inventory) << kInventory;
    ::setenv("IVA_NOW", "2017-03-01T00:00:00Z", 1);

    auto prepare = [&](const std::string& name) {
        Store s(snap, dir.path(), name);
        expect(s({"import", inventory.string()}).code == 0, "import");
        auto a = s({"assign", "2", "--uri", "cpe:/a:wireshark:wireshark:2.0.0", "--source", "CANDIDATE_SELECTED"});
        expect(a.code == 0, "assign: " + a.err);
        expect(s.states("2").size() == 3, "three wireshark alerts");
        return s;
    };

    // Every (from, to) pair on alert 1.
    const std::vector<std::string> states{"PENDING", "CONFIRMED", "DISCARDED"};
    int n = 0;
    for (const auto& from : states) {
        for (const auto& to : states) {
            auto s = prepare("sm" + std::to_string(n++) + ".db");
            if (from != "PENDING") expect(s({"decide", "--alert", "1", "--decision", from}).code == 0, "setup");
            auto r = s({"decide", "--alert", "1", "--decision", to});
            auto label = from + " -> " + to;
            if (to == "PENDING") {
                expect(r.code == 2, label + " accepted");
            } else if (from == "PENDING") {
                expect(r.code == 0, label + " rejected");
            } else {
                expect(r.code == 1, label + " accepted");
            }
            auto want = (from == "PENDING" && to != "PENDING") ? to : from;
            expect(s.states("2").at(1) == want, label + " left state " + s.states("2").at(1));

            // Rescans neither duplicate nor resurrect.
            auto before = s.states("2");
            for (int k = 0; k < 2; ++k) {
                auto rs = s({"--format", "json", "rescan"});
                expect(rs.code == 0 && json::parse(rs.out)["new_alerts"] == 0, label + " rescan created alerts");
            }
            expect(s.states("2") == before, label + " rescan changed alerts");
        }
    }

    // A group with a decided member cannot be decided as a whole.
    {
        auto s = prepare("group.db");
        auto groups = json_lines(s({"--format", "json", "alerts", "2", "--grouped"}).out);
        auto gid = groups.at(0)["group_id"].get<std::string>();
        auto first = groups.at(0)["members"].at(0)["id"].get<std::int64_t>();
        expect(s({"decide", "--alert", std::to_string(first), "--decision", "CONFIRMED"}).code == 0, "confirm");
        auto before = s.states("2");
        expect(s({"decide", "--group", gid, "--decision", "DISCARDED"}).code == 1, "mixed group decided");
        expect(s.states("2") == before, "partial group transition");
    }

    // Two snapshots: the second feed adds exactly one CVE for the assigned product.
    {
        auto snapdir = (dir.path() / "rescan-snap").string();
        Store s(snapdir, dir.path(), "two.db");
        auto dict = fixture_path("dictionary.xml").string();
        auto first = s({"--format", "json", "rescan", "--cpe-dict", dict, "--cve-feed",
                        fixture_path("cve_feed.xml").string()});
        expect(first.code == 0 && json::parse(first.out)["status"] == "updated", "first snapshot: " + first.out);
        expect(s({"import", inventory.string()}).code == 0, "import");
        expect(s({"assign", "2", "--candidate", "1"}).code == 0, "assign");
        auto base = s.states("2");
        expect(base.size() == 3, "alerts under the first snapshot");
        expect(s({"decide", "--alert", "3", "--decision", "DISCARDED"}).code == 0, "discard");

        auto same = s({"--format", "json", "rescan", "--cpe-dict", dict, "--cve-feed",
                       fixture_path("cve_feed.xml").string()});
        expect(json::parse(same.out)["status"] == "unchanged" && json::parse(same.out)["new_alerts"] == 0,
               "unchanged feed: " + same.out);

        auto second = s({"--format", "json", "rescan", "--cpe-dict", dict, "--cve-feed",
                         fixture_path("cve_feed_update.xml").string()});
        auto j = json::parse(second.out);
        expect(j["status"] == "updated", "second snapshot: " + second.out);
        expect(j["new_alerts"] == 1, "new alerts: " + j["new_alerts"].dump());
        auto after = s.states("2");
        expect(after.size() == 4, "alert count " + std::to_string(after.size()));
        expect(after.at(3) == "DISCARDED", "discarded alert resurrected");

        auto again = s({"--format", "json", "rescan", "--cpe-dict", dict, "--cve-feed",
                        fixture_path("cve_feed_update.xml").string()});
        expect(json::parse(again.out)["new_alerts"] == 0, "repeated rescan created alerts");
        expect(s.states("2") == after, "repeated rescan changed alerts");
    }
    ::unsetenv("IVA_NOW");
}

void audit_counts(const std::string& main_snap)
{
    TempDir dir("accept-audit");
    auto snap = ingest(dir.path() / "snap", "audit_dictionary.xml", "audit_feed.xml");
    auto r = cli({"--format", "json", "audit", "--snapshot", snap, "--out", (dir.path() / "report.json").string()});
    expect(r.code == 0, "exit code");
    auto j = json::parse(r.out);
    expect(j["cves_without_cpes"]["count"] == 3, "CPE-less CVEs " + j["cves_without_cpes"]["count"].dump());
    expect(j["feed_cpes_missing"]["count"] == 2, "missing URIs " + j["feed_cpes_missing"]["count"].dump());
    expect(j["semantic_duplicates"]["count"] == 2, "semantic duplicates " + j["semantic_duplicates"]["count"].dump());

    auto m = json::parse(cli({"--format", "json", "audit", "--snapshot", main_snap}).out);
    bool asterisk = false;
    for (const auto& p : m["semantic_duplicates"]["pairs"]) {
        asterisk = asterisk || (p["dictionary"] == "cpe:/a:digium:asterisk:1.4.0:beta1" &&
                                p["feed"] == "cpe:/a:digium:asterisk:1.4.0_beta1");
    }
    expect(asterisk, "asterisk pair not flagged");
}

} // namespace

int main()
{
    TempDir dir("accept");
    std::string snap;
    try {
        snap = ingest(dir.path() / "snap", "dictionary.xml", "cve_feed.xml");
    } catch (const Failure& f) {
        std::cout << "FAIL setup: " << f.what << '\n';
        return 1;
    }

    const std::vector<std::pair<std::string, std::function<void()>>> criteria{
        {"packed-uri-to-wfn", packed_uri_conversion},
        {"search-term-generation", dotnet_search_terms},
        {"binding-round-trips", binding_round_trips},
        {"levenshtein-oracle", levenshtein_oracle},
        {"deprecation-transparency", [&] { deprecation_transparency(snap); }},
        {"mysql-ranking", [&] { mysql_ranking(snap); }},
        {"cpe-list-search-oracle", cpe_list_search_oracle},
        {"summary-search-fallback", [&] { summary_search_fallback(snap); }},
        {"same-version-table", same_version_table},
        {"triage-state-machine", [&] { triage_state_machine(snap); }},
        {"audit-counts", [&] { audit_counts(snap); }},
    };

    int failed = 0;
    for (const auto& [name, check] : criteria) {
        try {
            check();
            std::cout << "PASS " << name << '\n';
        } catch (const Failure& f) {
            ++failed;
            std::cout << "FAIL " << name << ": " << f.what << '\n';
        } catch (const std::exception& e) {
            ++failed;
            std::cout << "FAIL " << name << ": exception: " << e.what() << '\n';
        }
        std::cout.flush();
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
