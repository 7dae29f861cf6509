#include "iva/cli.hpp"

#include "iva/api_server.hpp"
#include "iva/audit.hpp"
#include "iva/feed_fetch.hpp"
#include "iva/feed_parser.hpp"
#include "iva/json_io.hpp"
#include "iva/snapshot_io.hpp"
#include "iva/triage.hpp"
#include "iva/version.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

namespace iva {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Format { text, json };

struct Globals {
    std::string format = "text";
    std::size_t threshold = kDefaultMaxDistance;
    std::string store = "iva.db";
    std::string snapshot;
    bool strict_summary = false;
    bool verbose = false;
};

// Tabs and line breaks inside a text field would break the record layout.
std::string field(std::string s)
{
    for (auto& c : s) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s.empty() ? "-" : s;
}

std::string join(const std::vector<std::string>& parts, const char* sep = ",")
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out.empty() ? "-" : out;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

std::string score(const std::optional<double>& s)
{
    if (!s) return "-";
    std::ostringstream o;
    o << *s;
    return o.str();
}

struct Printer {
    std::ostream& out;
    Format format;

    void line(const json& j) const { out << j.dump() << '\n'; }

    template <class... Fields>
    void row(const Fields&... fields) const
    {
        bool first = true;
        ((out << (first ? "" : "\t") << fields, first = false), ...);
        out << '\n';
    }

    void cpe_candidate(const CpeCandidate& c) const
    {
        if (format == Format::json) return line(to_json(c));
        row(c.rank, c.entry.uri, c.vendor_distance, c.product_distance, yes_no(c.version_affinity.exact),
            field(c.entry.title));
    }

    void cve_candidate(const CveCandidate& c) const
    {
        if (format == Format::json) return line(to_json(c));
        std::vector<std::string> uris;
        for (const auto& m : c.matched_cpes) uris.push_back(m.uri);
        row(c.cve.id, to_string(c.origin), yes_no(c.exact_version), score(c.cve.cvss_score), join(uris));
    }

    void product(const ProductView& p) const
    {
        if (format == Format::json) return line(to_json(p));
        const auto& r = p.record;
        row(r.id, p.assignment ? "assigned" : "unassigned", p.assignment ? p.assignment->uri : "-",
            field(r.product.external_id), field(r.product.vendor_raw), field(r.product.product_raw),
            field(r.product.version_raw));
    }

    void alert(const Alert& a, const char* prefix = nullptr) const
    {
        if (format == Format::json) return line(to_json(a));
        if (prefix) out << prefix << '\t';
        row(a.id, a.product_id, a.cve_id, to_string(a.state), to_string(a.origin), yes_no(a.exact_version),
            a.group_id, join(a.matched_cpes));
    }

    void group(const AlertGroup& g) const
    {
        if (format == Format::json) return line(to_json(g));
        std::vector<std::string> ids;
        for (const auto& a : g.members) ids.push_back(std::to_string(a.id));
        row(g.group_id, g.members.size(), join(ids), join(g.cpes));
    }

    void assignment(const Assignment& a, bool changed) const
    {
        row("assignment", a.id, a.product_id, a.uri, to_string(a.source), changed ? "changed" : "unchanged",
            a.derived_from.value_or("-"));
    }
};

std::string read_source(const std::string& source)
{
    return fetch_feed(source).body;
}

std::shared_ptr<const CatalogSnapshot> load_snapshot_or_throw(const std::string& dir)
{
    if (dir.empty()) throw UsageError("--snapshot <dir> is required");
    return std::make_shared<const CatalogSnapshot>(load_snapshot(dir));
}

std::string default_user()
{
    if (const char* u = std::getenv("USER"); u && *u) return u;
    return "cli";
}

// Scoped redirection of the default logger to the error stream.
class LogToStream {
public:
    LogToStream(std::ostream& err, bool verbose) : previous_(spdlog::default_logger())
    {
        auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
        auto logger = std::make_shared<spdlog::logger>("iva", sink);
        logger->set_pattern("%l: %v");
        logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
        spdlog::set_default_logger(logger);
    }
    ~LogToStream() { spdlog::set_default_logger(previous_); }
    LogToStream(const LogToStream&) = delete;
    LogToStream& operator=(const LogToStream&) = delete;

private:
    std::shared_ptr<spdlog::logger> previous_;
};

class Cli {
public:
    Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

    int run(const std::vector<std::string>& args)
    {
        if (args.empty()) {
            err_ << app_.help();
            return kExitUsage;
        }
        try {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app_.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            out_ << help_target()->help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out_ << app_.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err_ << "error: " << e.what() << "\n\n" << help_target()->help();
            return kExitUsage;
        }
        if (!action_) {
            err_ << help_target()->help();
            return kExitUsage;
        }

        LogToStream log(err_, globals_.verbose);
        try {
            return action_();
        } catch (const UsageError& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const MalformedUri& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const MalformedFormattedString& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::invalid_argument& e) {
            // InvalidWfn, EmptyProduct and bad decision values.
            err_ << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            err_ << "error: " << e.what() << '\n';
            return kExitFailure;
        }
    }

private:
    std::ostream& out_;
    std::ostream& err_;
    CLI::App app_{"Inventory vulnerability assessment: CPE naming, feed ingest, matching, audit and triage.", "iva"};
    Globals globals_;
    std::function<int()> action_;

    Printer printer() const { return Printer{out_, globals_.format == "json" ? Format::json : Format::text}; }
    bool json_out() const { return globals_.format == "json"; }

    CLI::App* help_target()
    {
        CLI::App* target = &app_;
        for (;;) {
            auto subs = target->get_subcommands();
            if (subs.empty()) return target;
            target = subs.front();
        }
    }

    TriageOptions triage_options() const
    {
        TriageOptions o;
        o.max_distance = globals_.threshold;
        o.strict_summary = globals_.strict_summary;
        // A fixed clock makes stored timestamps, and so all output, reproducible.
        if (const char* now = std::getenv("IVA_NOW"); now && *now) {
            o.clock = [fixed = std::string(now)] { return fixed; };
        }
        return o;
    }

    std::unique_ptr<TriageService> open_service(TriageOptions o) const
    {
        return std::make_unique<TriageService>(globals_.store, std::move(o));
    }

    std::unique_ptr<TriageService> open_service_with_snapshot() const
    {
        auto svc = open_service(triage_options());
        svc->set_snapshot(load_snapshot_or_throw(globals_.snapshot));
        return svc;
    }

    void on(CLI::App* sub, std::function<int()> fn)
    {
        sub->callback([this, fn = std::move(fn)] { action_ = fn; });
    }

    void build()
    {
        app_.require_subcommand(1);
        app_.fallthrough();
        app_.add_option("--format", globals_.format, "Output encoding")
            ->check(CLI::IsMember({"text", "json"}))
            ->capture_default_str();
        app_.add_option("--threshold", globals_.threshold, "Maximum edit distance for name matching")
            ->check(CLI::Range(0, 64))
            ->capture_default_str();
        app_.add_option("--store", globals_.store, "Triage store (SQLite file)")
            ->envname("IVA_STORE")
            ->capture_default_str();
        app_.add_option("--snapshot", globals_.snapshot, "Catalog snapshot directory")->envname("IVA_SNAPSHOT");
        app_.add_flag("--strict-summary", globals_.strict_summary,
                      "Summary search requires one word similar to both vendor and product");
        app_.add_flag("-v,--verbose", globals_.verbose, "Log progress messages");

        build_cpe();
        build_feeds();
        build_match();
        build_audit();
        build_triage();
        build_serve();
    }

    void build_cpe()
    {
        auto* cpe = app_.add_subcommand("cpe", "CPE name conversion");
        cpe->require_subcommand(1);
        cpe->fallthrough();
        auto* convert = cpe->add_subcommand("convert", "Convert a name between uri, fs and wfn forms");
        convert->fallthrough();
        auto from = std::make_shared<std::string>();
        auto to = std::make_shared<std::string>();
        auto value = std::make_shared<std::string>();
        convert->add_option("--from", *from, "Input form")->required()->check(CLI::IsMember({"uri", "fs", "wfn"}));
        convert->add_option("--to", *to, "Output form")->required()->check(CLI::IsMember({"uri", "fs", "wfn"}));
        convert->add_option("value", *value, "Name to convert")->required();
        on(convert, [this, from, to, value] {
            Wfn wfn = *from == "uri"  ? unbind_uri(*value)
                      : *from == "fs" ? unbind_formatted_string(*value)
                                      : parse_wfn_text(*value);
            if (json_out()) {
                json j{{"uri", bind_to_uri(wfn)}, {"fs", bind_to_formatted_string(wfn)}, {"wfn", wfn_to_json(wfn)}};
                printer().line(j);
            } else if (*to == "uri") {
                out_ << bind_to_uri(wfn) << '\n';
            } else if (*to == "fs") {
                out_ << bind_to_formatted_string(wfn) << '\n';
            } else {
                out_ << to_wfn_text(wfn) << '\n';
            }
            return kExitOk;
        });
    }

    void build_feeds()
    {
        auto* feeds = app_.add_subcommand("feeds", "Feed ingestion");
        feeds->require_subcommand(1);
        feeds->fallthrough();
        auto* ingest = feeds->add_subcommand("ingest", "Parse a CPE dictionary and CVE feeds into a snapshot directory");
        ingest->fallthrough();
        auto dict = std::make_shared<std::string>();
        auto cve = std::make_shared<std::vector<std::string>>();
        auto outdir = std::make_shared<std::string>();
        auto when = std::make_shared<std::string>();
        ingest->add_option("--cpe-dict", *dict, "Dictionary path or URL")->required();
        ingest->add_option("--cve-feed", *cve, "CVE feed path or URL (repeatable)")->required();
        ingest->add_option("--out", *outdir, "Snapshot directory to write")->required();
        ingest->add_option("--snapshot-time", *when, "Recorded snapshot time (default: now)");
        on(ingest, [this, dict, cve, outdir, when] {
            auto dictionary = read_source(*dict);
            std::vector<std::string> feeds;
            for (const auto& f : *cve) feeds.push_back(read_source(f));
            IngestReport report;
            auto snapshot = ingest_documents(dictionary, feeds, when->empty() ? utc_now() : *when, &report);
            save_snapshot(snapshot, *outdir);
            if (json_out()) {
                printer().line(json{{"out", *outdir},
                                    {"snapshot_time", snapshot.snapshot_time()},
                                    {"dictionary_items", report.dictionary_items},
                                    {"dictionary_entries", report.dictionary_entries},
                                    {"cve_entries_seen", report.cve_entries_seen},
                                    {"cve_entries", report.cve_entries},
                                    {"skipped", report.skipped.size()}});
            } else {
                auto p = printer();
                p.row("snapshot_time", snapshot.snapshot_time());
                p.row("dictionary_items", report.dictionary_items);
                p.row("dictionary_entries", report.dictionary_entries);
                p.row("cve_entries_seen", report.cve_entries_seen);
                p.row("cve_entries", report.cve_entries);
                p.row("skipped", report.skipped.size());
            }
            return kExitOk;
        });
    }

    void build_match()
    {
        auto* match = app_.add_subcommand("match", "Offline matching against a snapshot");
        match->require_subcommand(1);
        match->fallthrough();

        auto* cpe = match->add_subcommand("cpe", "Rank dictionary CPEs for an inventory product");
        cpe->fallthrough();
        auto product = std::make_shared<InventoryProduct>();
        auto limit = std::make_shared<std::size_t>(10);
        cpe->add_option("--vendor", product->vendor_raw, "Vendor as recorded in the inventory");
        cpe->add_option("--product", product->product_raw, "Product name as recorded")->required();
        cpe->add_option("--version", product->version_raw, "Version as recorded");
        cpe->add_option("--limit", *limit, "Maximum candidates (0 = all)")->capture_default_str();
        on(cpe, [this, product, limit] {
            auto snap = load_snapshot_or_throw(globals_.snapshot);
            auto cands = find_cpe_candidates(*product, *snap, globals_.threshold);
            if (*limit && cands.size() > *limit) cands.resize(*limit);
            if (cands.empty()) err_ << "no candidates\n";
            for (const auto& c : cands) printer().cpe_candidate(c);
            return kExitOk;
        });

        auto* cve = match->add_subcommand("cve", "Find CVEs for an assigned CPE");
        cve->fallthrough();
        auto name = std::make_shared<std::string>();
        cve->add_option("--cpe", *name, "Assigned CPE (URI or formatted string)")->required();
        on(cve, [this, name] {
            auto snap = load_snapshot_or_throw(globals_.snapshot);
            CveSearchOptions o;
            o.max_distance = globals_.threshold;
            o.strict_single_word = globals_.strict_summary;
            for (const auto& c : find_cve_candidates(unbind_any(*name), *snap, o)) printer().cve_candidate(c);
            return kExitOk;
        });

        build_match_tools(match);
    }

    void build_match_tools(CLI::App* match)
    {
        auto* terms = match->add_subcommand("terms", "Show the search terms generated for an inventory product");
        terms->fallthrough();
        auto product = std::make_shared<InventoryProduct>();
        terms->add_option("--vendor", product->vendor_raw, "Vendor as recorded in the inventory");
        terms->add_option("--product", product->product_raw, "Product name as recorded")->required();
        terms->add_option("--version", product->version_raw, "Version as recorded");
        on(terms, [this, product] {
            auto t = generate_search_terms(*product);
            if (json_out()) {
                printer().line(json{{"vendor_terms", t.vendor_terms}, {"product_terms", t.product_terms}});
                return kExitOk;
            }
            for (const auto& v : t.vendor_terms) printer().row("vendor", v);
            for (const auto& v : t.product_terms) printer().row("product", v);
            return kExitOk;
        });

        auto* version = match->add_subcommand("version", "Relate a product version to a CVE CPE version");
        version->fallthrough();
        auto have = std::make_shared<std::string>();
        auto cve = std::make_shared<std::string>();
        version->add_option("--product-version", *have, "Installed version")->required();
        version->add_option("--cve-version", *cve, "Version component of the CVE CPE ('*' = ANY, '-' = NA)")
            ->required();
        on(version, [this, have, cve] {
            auto value = *cve == "*"   ? AttributeValue::any()
                         : *cve == "-" ? AttributeValue::na()
                                       : AttributeValue::str(*cve);
            auto rel = relate_versions(parse_version(*have), value);
            const char* name = rel == VersionRelation::none          ? "NONE"
                               : rel == VersionRelation::any_version ? "ANY_VERSION"
                               : rel == VersionRelation::exact       ? "EXACT"
                               : rel == VersionRelation::wildcard    ? "WILDCARD"
                                                                     : "MAIN_VERSION";
            bool same = rel != VersionRelation::none;
            if (json_out()) {
                printer().line(json{{"relation", name}, {"same_version", same}, {"exact_version", is_exact(rel)}});
            } else {
                printer().row(name, yes_no(same), yes_no(is_exact(rel)));
            }
            return kExitOk;
        });
    }

    void build_audit()
    {
        auto* audit = app_.add_subcommand("audit", "Consistency audit of a snapshot");
        audit->fallthrough();
        auto path = std::make_shared<std::string>();
        audit->add_option("--out", *path, "Write the structured JSON report here");
        on(audit, [this, path] {
            auto snap = load_snapshot_or_throw(globals_.snapshot);
            auto report = run_audit(*snap);
            if (!path->empty()) {
                std::ofstream f(*path, std::ios::binary | std::ios::trunc);
                if (!f) throw std::runtime_error("cannot write " + *path);
                f << report_to_json(report);
                std::ofstream(*path + ".txt", std::ios::binary | std::ios::trunc) << report_summary(report);
            }
            if (json_out()) {
                printer().line(json::parse(report_to_json(report)));
            } else {
                out_ << report_summary(report);
            }
            return kExitOk;
        });
    }

    static std::int64_t parse_id(const std::string& s)
    {
        try {
            std::size_t pos = 0;
            auto v = std::stoll(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::exception&) {
        }
        throw UsageError("not a product id: '" + s + "'");
    }

    void build_triage()
    {
        auto* products = app_.add_subcommand("products", "List inventory products");
        products->fallthrough();
        auto status = std::make_shared<std::string>();
        products->add_option("--status", *status, "Filter")->check(CLI::IsMember({"assigned", "unassigned"}));
        on(products, [this, status] {
            auto svc = open_service(triage_options());
            auto filter = status->empty() ? std::nullopt : std::optional<std::string>(*status);
            for (const auto& p : svc->list_products(filter)) printer().product(p);
            return kExitOk;
        });

        auto* import = app_.add_subcommand("import", "Import an inventory file (CSV or JSON)");
        import->fallthrough();
        auto file = std::make_shared<std::string>();
        auto source = std::make_shared<std::string>("file");
        import->add_option("file", *file, "Inventory file")->required();
        import->add_option("--source", *source, "Inventory source label")->capture_default_str();
        on(import, [this, file, source] {
            auto svc = open_service(triage_options());
            auto s = svc->import_inventory_file(*file, *source);
            for (const auto& e : s.errors) err_ << "row " << e.row << ": " << e.reason << '\n';
            if (json_out()) return printer().line(to_json(s)), kExitOk;
            auto p = printer();
            p.row("rows", s.rows);
            p.row("created", s.created);
            p.row("updated", s.updated);
            p.row("unchanged", s.unchanged);
            p.row("skipped", s.errors.size());
            return kExitOk;
        });

        auto* candidates = app_.add_subcommand("candidates", "Ranked CPE candidates for a product");
        candidates->fallthrough();
        auto cand_id = std::make_shared<std::string>();
        auto limit = std::make_shared<std::size_t>(10);
        candidates->add_option("product-id", *cand_id)->required();
        candidates->add_option("--limit", *limit, "Maximum candidates")->capture_default_str();
        on(candidates, [this, cand_id, limit] {
            auto svc = open_service_with_snapshot();
            auto list = svc->list_candidates(parse_id(*cand_id), *limit);
            if (list.no_candidates) err_ << "no candidates; enter a CPE manually with 'assign --uri'\n";
            for (const auto& c : list.candidates) printer().cpe_candidate(c);
            return kExitOk;
        });

        build_assign();

        auto* scan = app_.add_subcommand("scan", "Match a product's assigned CPE against the snapshot");
        scan->fallthrough();
        auto scan_id = std::make_shared<std::string>();
        scan->add_option("product-id", *scan_id)->required();
        on(scan, [this, scan_id] {
            auto svc = open_service_with_snapshot();
            auto r = svc->scan_product(parse_id(*scan_id));
            for (const auto& a : r.new_alerts) printer().alert(a);
            err_ << r.candidates << " candidates, " << r.new_alerts.size() << " new alerts\n";
            return kExitOk;
        });

        auto* alerts = app_.add_subcommand("alerts", "List a product's alerts");
        alerts->fallthrough();
        auto alerts_id = std::make_shared<std::string>();
        auto state = std::make_shared<std::string>();
        auto grouped = std::make_shared<bool>(false);
        alerts->add_option("product-id", *alerts_id)->required();
        alerts->add_option("--state", *state, "PENDING, CONFIRMED or DISCARDED");
        alerts->add_flag("--grouped", *grouped, "One record per group of equal matched CPE sets");
        on(alerts, [this, alerts_id, state, grouped] {
            auto svc = open_service(triage_options());
            auto st = parse_state(*state);
            if (*grouped) {
                for (const auto& g : svc->list_alert_groups(parse_id(*alerts_id), st)) printer().group(g);
            } else {
                for (const auto& a : svc->list_alerts(parse_id(*alerts_id), st)) printer().alert(a);
            }
            return kExitOk;
        });

        auto* decide = app_.add_subcommand("decide", "Confirm or discard pending alerts");
        decide->fallthrough();
        auto ids = std::make_shared<std::vector<std::int64_t>>();
        auto group = std::make_shared<std::string>();
        auto decision = std::make_shared<std::string>();
        auto user = std::make_shared<std::string>(default_user());
        auto* ids_opt = decide->add_option("--alert", *ids, "Alert id (repeatable)");
        auto* group_opt = decide->add_option("--group", *group, "Group id");
        ids_opt->excludes(group_opt);
        decide->add_option("--decision", *decision, "CONFIRMED or DISCARDED")->required();
        decide->add_option("--user", *user, "Recorded as decided_by")->capture_default_str();
        on(decide, [this, ids, group, decision, user] {
            auto d = parse_state(*decision);
            if (!d || *d == AlertState::pending) throw UsageError("--decision must be CONFIRMED or DISCARDED");
            if (ids->empty() && group->empty()) throw UsageError("give --alert <id>... or --group <id>");
            auto svc = open_service(triage_options());
            auto updated = group->empty() ? svc->set_alert_state(*ids, *d, *user) : svc->set_group_state(*group, *d, *user);
            for (const auto& a : updated) printer().alert(a);
            return kExitOk;
        });

        auto* report = app_.add_subcommand("report", "Summary report");
        report->fallthrough();
        auto filter = std::make_shared<ReportFilter>();
        auto r_state = std::make_shared<std::string>();
        report->add_option("--vendor", filter->vendor, "Case-insensitive vendor substring");
        report->add_option("--state", *r_state, "Only alerts in this state");
        report->add_option("--since", filter->since, "Alerts created at or after (ISO-8601)");
        report->add_option("--until", filter->until, "Alerts created at or before (ISO-8601)");
        report->add_option("--status", filter->status, "assigned or unassigned")
            ->check(CLI::IsMember({"assigned", "unassigned"}));
        on(report, [this, filter, r_state] {
            auto f = *filter;
            f.state = parse_state(*r_state);
            auto svc = open_service(triage_options());
            auto r = svc->report(f);
            if (json_out()) return printer().line(to_json(r)), kExitOk;
            auto p = printer();
            p.row("products_total", r.products_total);
            p.row("products_assigned", r.products_assigned);
            p.row("products_unassigned", r.products_unassigned);
            p.row("alerts_pending", r.alerts_pending);
            p.row("alerts_confirmed", r.alerts_confirmed);
            p.row("alerts_discarded", r.alerts_discarded);
            for (const auto& rp : r.products) {
                p.row("product", rp.record.id, rp.status, rp.assigned_uri.value_or("-"),
                      field(rp.record.product.vendor_raw), field(rp.record.product.product_raw),
                      field(rp.record.product.version_raw), rp.pending, rp.confirmed, rp.discarded);
            }
            for (const auto& a : r.alerts) p.alert(a, "alert");
            return kExitOk;
        });

        auto* rescan = app_.add_subcommand("rescan", "Refresh feeds and rescan every assigned product");
        rescan->fallthrough();
        auto feeds = std::make_shared<FeedSources>();
        rescan->add_option("--cpe-dict", feeds->cpe_dictionary, "Dictionary path or URL");
        rescan->add_option("--cve-feed", feeds->cve_feeds, "CVE feed path or URL (repeatable)");
        on(rescan, [this, feeds] {
            if (feeds->cpe_dictionary.empty() != feeds->cve_feeds.empty()) {
                throw UsageError("--cpe-dict and --cve-feed go together");
            }
            auto o = triage_options();
            o.feeds = *feeds;
            if (!feeds->empty() && !globals_.snapshot.empty()) o.snapshot_dir = globals_.snapshot;
            auto svc = open_service(std::move(o));
            if (!globals_.snapshot.empty() && std::filesystem::exists(std::filesystem::path(globals_.snapshot) / "manifest.json")) {
                svc->set_snapshot(load_snapshot_or_throw(globals_.snapshot));
            }
            auto r = svc->scheduled_rescan();
            if (json_out()) {
                printer().line(to_json(r));
            } else {
                auto p = printer();
                p.row("status", r.status);
                p.row("snapshot_time", field(r.snapshot_time));
                p.row("products_scanned", r.products_scanned);
                p.row("new_alerts", r.new_alerts);
                if (!r.error.empty()) p.row("error", field(r.error));
            }
            return r.status == "error" ? kExitFailure : kExitOk;
        });
    }

    void build_assign()
    {
        auto* assign = app_.add_subcommand("assign", "Assign a CPE to a product");
        assign->fallthrough();
        struct Args {
            std::string product_id;
            std::string uri, fs, wfn_text, source, derived_from;
            std::size_t candidate = 0;
            std::string user = default_user();
            bool auto_top = false;
        };
        auto a = std::make_shared<Args>();
        assign->add_option("product-id", a->product_id, "Product id (optional with --auto-assign-top)");
        auto* uri = assign->add_option("--uri", a->uri, "CPE URI to assign");
        auto* fs = assign->add_option("--fs", a->fs, "CPE formatted string to assign");
        auto* wfn = assign->add_option("--wfn", a->wfn_text, "WFN text (part:a, vendor:..., ...) to assign");
        auto* cand = assign->add_option("--candidate", a->candidate, "Assign the candidate at this rank");
        auto* top = assign->add_flag("--auto-assign-top", a->auto_top,
                                     "EXPERIMENTAL: assign every rank-1 candidate without review");
        assign->add_option("--source", a->source, "CANDIDATE_SELECTED or USER_EDITED");
        assign->add_option("--derived-from", a->derived_from, "Candidate URI the edited CPE started from");
        assign->add_option("--user", a->user, "Recorded as assigned_by")->capture_default_str();
        uri->excludes(fs)->excludes(wfn)->excludes(cand)->excludes(top);
        fs->excludes(wfn)->excludes(cand)->excludes(top);
        wfn->excludes(cand)->excludes(top);
        cand->excludes(top);

        on(assign, [this, a] {
            auto svc = open_service_with_snapshot();
            if (a->auto_top) return auto_assign_top(*svc, a->product_id, a->user);
            if (a->product_id.empty()) throw UsageError("product-id is required");
            auto pid = parse_id(a->product_id);

            Wfn target;
            auto source = AssignmentSource::user_edited;
            std::optional<std::string> derived;
            if (!a->derived_from.empty()) derived = canonical_uri(a->derived_from);
            if (a->candidate) {
                auto list = svc->list_candidates(pid, a->candidate);
                if (list.candidates.size() < a->candidate) {
                    throw std::runtime_error("product has only " + std::to_string(list.candidates.size()) + " candidates");
                }
                target = list.candidates[a->candidate - 1].entry.wfn;
                source = AssignmentSource::candidate_selected;
            } else if (!a->uri.empty()) {
                target = unbind_uri(a->uri);
            } else if (!a->fs.empty()) {
                target = unbind_formatted_string(a->fs);
            } else if (!a->wfn_text.empty()) {
                target = parse_wfn_text(a->wfn_text);
            } else {
                throw UsageError("give --candidate, --uri, --fs or --wfn");
            }
            if (!a->source.empty()) {
                auto parsed = parse_assignment_source(a->source);
                if (!parsed) throw UsageError("--source must be CANDIDATE_SELECTED or USER_EDITED");
                source = *parsed;
            }
            print_assign(svc->assign_cpe(pid, target, source, a->user, derived));
            return kExitOk;
        });
    }

    void print_assign(const AssignResult& r) const
    {
        if (json_out()) return printer().line(to_json(r));
        auto p = printer();
        p.assignment(r.assignment, r.changed);
        for (const auto& al : r.new_alerts) p.alert(al, "alert");
    }

    int auto_assign_top(TriageService& svc, const std::string& product_id, const std::string& user)
    {
        err_ << "warning: --auto-assign-top is experimental; rank-1 candidates are often wrong and must be "
                "reviewed\n";
        std::vector<std::int64_t> targets;
        if (product_id.empty()) {
            for (const auto& p : svc.list_products("unassigned")) targets.push_back(p.record.id);
        } else {
            targets.push_back(parse_id(product_id));
        }
        for (auto pid : targets) {
            auto list = svc.list_candidates(pid, 1);
            if (list.candidates.empty()) {
                err_ << "product " << pid << ": no candidates\n";
                continue;
            }
            print_assign(svc.assign_cpe(pid, list.candidates[0].entry.wfn, AssignmentSource::candidate_selected,
                                        user));
        }
        return kExitOk;
    }

    static std::optional<AlertState> parse_state(const std::string& s)
    {
        if (s.empty()) return std::nullopt;
        auto st = parse_alert_state(s);
        if (!st) throw UsageError("unknown alert state '" + s + "'");
        return st;
    }

    void build_serve()
    {
        auto* serve = app_.add_subcommand("serve", "Serve the HTTP/JSON API under /api/v1");
        serve->fallthrough();
        struct Args {
            std::string host = "127.0.0.1";
            int port = 8080;
            std::string token;
            std::vector<std::string> cve_feeds;
            std::string cpe_dict;
        };
        auto a = std::make_shared<Args>();
        serve->add_option("--host", a->host)->capture_default_str();
        serve->add_option("--port", a->port)->capture_default_str()->check(CLI::Range(0, 65535));
        serve->add_option("--token", a->token, "Require this bearer token")->envname("IVA_API_TOKEN");
        serve->add_option("--cpe-dict", a->cpe_dict, "Dictionary source used by /admin/rescan");
        serve->add_option("--cve-feed", a->cve_feeds, "CVE feed sources used by /admin/rescan");
        on(serve, [this, a] {
            auto o = triage_options();
            o.feeds = FeedSources{a->cpe_dict, a->cve_feeds};
            if (!o.feeds.empty() && !globals_.snapshot.empty()) o.snapshot_dir = globals_.snapshot;
            auto svc = open_service(std::move(o));
            if (!globals_.snapshot.empty()) svc->set_snapshot(load_snapshot_or_throw(globals_.snapshot));
            ApiOptions api;
            if (!a->token.empty()) api.bearer_token = a->token;
            ApiServer server(*svc, api);

            int port = a->port;
            if (port == 0) {
                port = server.bind_to_any_port(a->host);
                if (port < 0) throw std::runtime_error("cannot bind " + a->host);
            } else if (!server.bind(a->host, port)) {
                throw std::runtime_error("cannot bind " + a->host + ":" + std::to_string(port));
            }
            err_ << "listening on http://" << a->host << ':' << port << "/api/v1\n" << std::flush;

            // SIGINT / SIGTERM stop the server.
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);
            std::thread waiter([&server, set] {
                int sig = 0;
                sigwait(&set, &sig);
                server.stop();
            });
            waiter.detach();
            server.listen_after_bind();
            return kExitOk;
        });
    }
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Cli cli(out, err);
    return cli.run(args);
}

} // namespace iva
