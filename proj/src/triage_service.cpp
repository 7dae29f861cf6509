#include "iva/triage.hpp"

#include "iva/feed_fetch.hpp"
#include "iva/feed_parser.hpp"
#include "iva/snapshot_io.hpp"
#include "triage_store.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace iva {

namespace {

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

int alert_tier(const Alert& a)
{
    if (a.origin == CveOrigin::summary) return 2;
    return a.exact_version ? 0 : 1;
}

void sort_for_triage(std::vector<Alert>& alerts)
{
    std::stable_sort(alerts.begin(), alerts.end(), [](const Alert& a, const Alert& b) {
        if (alert_tier(a) != alert_tier(b)) return alert_tier(a) < alert_tier(b);
        return cve_id_less(a.cve_id, b.cve_id);
    });
}

std::string stamp_key(const std::string& source)
{
    return "feed_stamp:" + source;
}

} // namespace

std::string_view to_string(AlertState s) noexcept
{
    switch (s) {
    case AlertState::pending: return "PENDING";
    case AlertState::confirmed: return "CONFIRMED";
    case AlertState::discarded: return "DISCARDED";
    }
    return "PENDING";
}

std::string_view to_string(AssignmentSource s) noexcept
{
    return s == AssignmentSource::user_edited ? "USER_EDITED" : "CANDIDATE_SELECTED";
}

std::optional<AlertState> parse_alert_state(std::string_view s)
{
    auto u = upper(s);
    if (u == "PENDING") return AlertState::pending;
    if (u == "CONFIRMED") return AlertState::confirmed;
    if (u == "DISCARDED") return AlertState::discarded;
    return std::nullopt;
}

std::optional<AssignmentSource> parse_assignment_source(std::string_view s)
{
    auto u = upper(s);
    if (u == "CANDIDATE_SELECTED") return AssignmentSource::candidate_selected;
    if (u == "USER_EDITED") return AssignmentSource::user_edited;
    return std::nullopt;
}

std::optional<CveOrigin> parse_cve_origin(std::string_view s)
{
    auto u = upper(s);
    if (u == "CPE_LIST") return CveOrigin::cpe_list;
    if (u == "SUMMARY") return CveOrigin::summary;
    return std::nullopt;
}

std::string utc_now()
{
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

TriageService::TriageService(const std::string& store_path, TriageOptions options)
    : options_(std::move(options)), store_(std::make_unique<TriageStore>(store_path))
{
    if (!options_.clock) options_.clock = utc_now;
}

TriageService::~TriageService() = default;

std::string TriageService::now() const
{
    return options_.clock();
}

void TriageService::set_snapshot(std::shared_ptr<const CatalogSnapshot> snapshot)
{
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(snapshot);
}

std::shared_ptr<const CatalogSnapshot> TriageService::snapshot() const
{
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

std::shared_ptr<const CatalogSnapshot> TriageService::require_snapshot() const
{
    auto snap = snapshot();
    if (!snap) throw NoSnapshot("no catalog snapshot is loaded");
    return snap;
}

ImportSummary TriageService::import_inventory(std::string_view content, const std::string& source)
{
    ImportSummary summary;
    auto products = parse_inventory(content, summary.errors);
    summary.rows = products.size() + summary.errors.size();
    for (const auto& e : summary.errors) spdlog::warn("inventory row {} skipped: {}", e.row, e.reason);

    std::lock_guard lock(store_mutex_);
    TriageStore::Transaction tx(*store_);
    auto stamp = now();
    for (const auto& p : products) {
        switch (store_->upsert_product(source, p, stamp)) {
        case TriageStore::Upsert::created: ++summary.created; break;
        case TriageStore::Upsert::updated: ++summary.updated; break;
        case TriageStore::Upsert::unchanged: ++summary.unchanged; break;
        }
    }
    tx.commit();
    return summary;
}

ImportSummary TriageService::import_inventory_file(const std::filesystem::path& path, const std::string& source)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read inventory file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return import_inventory(buf.str(), source);
}

std::vector<ProductView> TriageService::list_products(const std::optional<std::string>& status) const
{
    std::lock_guard lock(store_mutex_);
    std::vector<ProductView> out;
    for (auto& rec : store_->products()) {
        auto assignment = store_->active_assignment(rec.id);
        ProductView v{std::move(rec), std::move(assignment)};
        if (status == "assigned" && !v.assignment) continue;
        if (status == "unassigned" && v.assignment) continue;
        out.push_back(std::move(v));
    }
    return out;
}

ProductView TriageService::get_product(std::int64_t product_id) const
{
    std::lock_guard lock(store_mutex_);
    auto rec = store_->product(product_id);
    if (!rec) throw UnknownProduct("unknown product " + std::to_string(product_id));
    return ProductView{std::move(*rec), store_->active_assignment(product_id)};
}

CandidateList TriageService::list_candidates(std::int64_t product_id, std::size_t limit) const
{
    auto product = get_product(product_id);
    auto snap = require_snapshot();
    CandidateList out;
    out.product_id = product_id;
    out.candidates = find_cpe_candidates(product.record.product, *snap, options_.max_distance);
    if (out.candidates.size() > limit) out.candidates.resize(limit);
    out.no_candidates = out.candidates.empty();
    return out;
}

AssignResult TriageService::assign_cpe(std::int64_t product_id, const Wfn& wfn, AssignmentSource source,
                                       const std::string& user, const std::optional<std::string>& derived_from)
{
    if (!wfn.vendor().is_string() || !wfn.product().is_string()) {
        throw InvalidWfn("an assigned CPE needs concrete vendor and product values");
    }
    auto uri = bind_to_uri(wfn);
    auto snap = snapshot();

    std::lock_guard lock(store_mutex_);
    if (!store_->product(product_id)) throw UnknownProduct("unknown product " + std::to_string(product_id));
    auto prior = store_->active_assignment(product_id);
    if (prior && prior->uri == uri) return AssignResult{std::move(*prior), false, {}};

    Assignment a;
    a.product_id = product_id;
    a.wfn = wfn;
    a.uri = uri;
    a.source = source;
    if (source == AssignmentSource::user_edited) a.derived_from = derived_from;
    a.assigned_at = now();
    a.assigned_by = user;
    {
        TriageStore::Transaction tx(*store_);
        if (prior) {
            store_->delete_pending_alerts(product_id, prior->uri);
            store_->deactivate_assignments(product_id);
        }
        a.id = store_->insert_assignment(a);
        tx.commit();
    }

    AssignResult result{a, true, {}};
    if (snap) result.new_alerts = scan_locked(product_id, *snap).new_alerts;
    return result;
}

ScanResult TriageService::scan_product(std::int64_t product_id)
{
    auto snap = require_snapshot();
    std::lock_guard lock(store_mutex_);
    return scan_locked(product_id, *snap);
}

ScanResult TriageService::scan_locked(std::int64_t product_id, const CatalogSnapshot& snapshot)
{
    if (!store_->product(product_id)) throw UnknownProduct("unknown product " + std::to_string(product_id));
    auto assignment = store_->active_assignment(product_id);
    if (!assignment) throw Unassigned("product " + std::to_string(product_id) + " has no CPE assigned");

    CveSearchOptions opts;
    opts.max_distance = options_.max_distance;
    opts.strict_single_word = options_.strict_summary;
    auto candidates = find_cve_candidates(assignment->wfn, snapshot, opts);

    ScanResult result;
    result.product_id = product_id;
    result.candidates = candidates.size();
    auto stamp = now();

    TriageStore::Transaction tx(*store_);
    for (const auto& c : candidates) {
        Alert a;
        a.product_id = product_id;
        a.cve_id = c.cve.id;
        a.assignment_key = assignment->uri;
        a.origin = c.origin;
        std::vector<std::string> uris;
        for (const auto& m : c.matched_cpes) uris.push_back(m.uri);
        std::sort(uris.begin(), uris.end());
        uris.erase(std::unique(uris.begin(), uris.end()), uris.end());
        a.matched_cpes = std::move(uris);
        a.exact_version = c.exact_version;
        a.summary = c.cve.summary;
        a.cvss_score = c.cve.cvss_score;
        a.created_at = stamp;
        if (auto id = store_->insert_alert(a)) result.new_alerts.push_back(*store_->alert(*id));
    }
    tx.commit();
    sort_for_triage(result.new_alerts);
    return result;
}

std::vector<Alert> TriageService::list_alerts(std::int64_t product_id, std::optional<AlertState> state) const
{
    std::lock_guard lock(store_mutex_);
    if (!store_->product(product_id)) throw UnknownProduct("unknown product " + std::to_string(product_id));
    auto assignment = store_->active_assignment(product_id);
    if (!assignment) return {};
    auto alerts = store_->alerts(product_id, assignment->uri);
    if (state) {
        std::erase_if(alerts, [&](const Alert& a) { return a.state != *state; });
    }
    sort_for_triage(alerts);
    return alerts;
}

std::vector<AlertGroup> TriageService::list_alert_groups(std::int64_t product_id,
                                                         std::optional<AlertState> state) const
{
    std::vector<AlertGroup> groups;
    std::map<std::string, std::size_t> index;
    for (auto& a : list_alerts(product_id, state)) {
        auto [it, inserted] = index.try_emplace(a.group_id, groups.size());
        if (inserted) groups.push_back(AlertGroup{a.group_id, a.matched_cpes, {}});
        groups[it->second].members.push_back(std::move(a));
    }
    return groups;
}

std::vector<Alert> TriageService::decide_locked(std::vector<Alert> alerts, AlertState decision,
                                                const std::string& user)
{
    if (decision == AlertState::pending) throw std::invalid_argument("decision must be CONFIRMED or DISCARDED");
    for (const auto& a : alerts) {
        if (a.state != AlertState::pending) {
            throw AlreadyDecided("alert " + std::to_string(a.id) + " (" + a.cve_id + ") is already " +
                                 std::string(to_string(a.state)));
        }
    }
    auto stamp = now();
    TriageStore::Transaction tx(*store_);
    for (const auto& a : alerts) store_->update_alert_state(a.id, decision, user, stamp);
    tx.commit();
    for (auto& a : alerts) a = *store_->alert(a.id);
    return alerts;
}

std::vector<Alert> TriageService::set_alert_state(const std::vector<std::int64_t>& alert_ids, AlertState decision,
                                                  const std::string& user)
{
    if (alert_ids.empty()) throw UnknownAlert("no alert ids given");
    std::lock_guard lock(store_mutex_);
    std::vector<Alert> alerts;
    for (auto id : alert_ids) {
        if (std::any_of(alerts.begin(), alerts.end(), [&](const Alert& a) { return a.id == id; })) continue;
        auto a = store_->alert(id);
        if (!a) throw UnknownAlert("unknown alert " + std::to_string(id));
        alerts.push_back(std::move(*a));
    }
    return decide_locked(std::move(alerts), decision, user);
}

std::vector<Alert> TriageService::set_group_state(const std::string& group_id, AlertState decision,
                                                  const std::string& user)
{
    auto colon = group_id.find(':');
    std::int64_t product_id = 0;
    try {
        if (colon == std::string::npos) throw std::invalid_argument("no product part");
        std::size_t used = 0;
        product_id = std::stoll(group_id.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
        throw UnknownAlert("malformed group id '" + group_id + "'");
    }

    std::lock_guard lock(store_mutex_);
    auto assignment = store_->active_assignment(product_id);
    std::vector<Alert> members;
    if (assignment) {
        for (auto& a : store_->alerts(product_id, assignment->uri)) {
            if (a.group_id == group_id) members.push_back(std::move(a));
        }
    }
    if (members.empty()) throw UnknownAlert("unknown alert group '" + group_id + "'");
    sort_for_triage(members);
    return decide_locked(std::move(members), decision, user);
}

RescanSummary TriageService::scheduled_rescan()
{
    RescanSummary summary;
    try {
        auto snap = snapshot();
        if (options_.feeds.empty()) {
            if (!snap) throw NoSnapshot("no catalog snapshot is loaded and no feed sources are configured");
            summary.status = "rescanned";
        } else {
            std::vector<std::string> sources{options_.feeds.cpe_dictionary};
            sources.insert(sources.end(), options_.feeds.cve_feeds.begin(), options_.feeds.cve_feeds.end());

            std::vector<FetchRequest> requests;
            {
                std::lock_guard lock(store_mutex_);
                for (const auto& s : sources) requests.push_back({s, store_->meta(stamp_key(s))});
            }
            auto results = fetch_feeds(requests);
            bool changed = std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.unchanged; });
            if (!changed && snap) {
                summary.status = "unchanged";
                summary.snapshot_time = snap->snapshot_time();
                return summary;
            }
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (results[i].unchanged) results[i] = fetch_feed(sources[i]);
            }
            std::vector<std::string> feeds;
            for (std::size_t i = 1; i < results.size(); ++i) feeds.push_back(std::move(results[i].body));
            auto rebuilt = std::make_shared<const CatalogSnapshot>(
                ingest_documents(results[0].body, feeds, now()));
            if (options_.snapshot_dir) save_snapshot(*rebuilt, *options_.snapshot_dir);
            {
                std::lock_guard lock(store_mutex_);
                TriageStore::Transaction tx(*store_);
                for (std::size_t i = 0; i < results.size(); ++i) store_->set_meta(stamp_key(sources[i]), results[i].stamp);
                tx.commit();
            }
            set_snapshot(rebuilt);
            snap = rebuilt;
            summary.status = "updated";
        }

        summary.snapshot_time = snap->snapshot_time();
        std::lock_guard lock(store_mutex_);
        for (const auto& a : store_->active_assignments()) {
            auto r = scan_locked(a.product_id, *snap);
            ++summary.products_scanned;
            summary.new_alerts += r.new_alerts.size();
        }
    } catch (const std::exception& e) {
        spdlog::error("rescan failed: {}", e.what());
        summary.status = "error";
        summary.error = e.what();
        if (auto snap = snapshot()) summary.snapshot_time = snap->snapshot_time();
    }
    return summary;
}

Report TriageService::report(const ReportFilter& filter) const
{
    auto vendor_matches = [&](const std::string& vendor) {
        if (!filter.vendor) return true;
        auto hay = upper(vendor);
        return hay.find(upper(*filter.vendor)) != std::string::npos;
    };
    auto alert_matches = [&](const Alert& a) {
        if (filter.state && a.state != *filter.state) return false;
        if (filter.since && a.created_at < *filter.since) return false;
        if (filter.until && a.created_at > *filter.until) return false;
        return true;
    };

    Report report;
    std::lock_guard lock(store_mutex_);
    for (auto& rec : store_->products()) {
        if (!vendor_matches(rec.product.vendor_raw)) continue;
        auto assignment = store_->active_assignment(rec.id);
        std::string status = assignment ? "assigned" : "unassigned";
        if (filter.status && *filter.status != status) continue;

        ReportProduct row{rec, status, std::nullopt, 0, 0, 0};
        if (assignment) {
            row.assigned_uri = assignment->uri;
            auto alerts = store_->alerts(rec.id, assignment->uri);
            sort_for_triage(alerts);
            for (auto& a : alerts) {
                if (!alert_matches(a)) continue;
                switch (a.state) {
                case AlertState::pending: ++row.pending; break;
                case AlertState::confirmed: ++row.confirmed; break;
                case AlertState::discarded: ++row.discarded; break;
                }
                report.alerts.push_back(std::move(a));
            }
        }
        ++report.products_total;
        (assignment ? report.products_assigned : report.products_unassigned) += 1;
        report.alerts_pending += row.pending;
        report.alerts_confirmed += row.confirmed;
        report.alerts_discarded += row.discarded;
        report.products.push_back(std::move(row));
    }
    return report;
}

} // namespace iva
