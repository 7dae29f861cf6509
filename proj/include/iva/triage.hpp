#pragma once

#include "iva/catalog.hpp"
#include "iva/cpe_matcher.hpp"
#include "iva/cve_matcher.hpp"
#include "iva/search_terms.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iva {

class TriageStore;

// Errors ---------------------------------------------------------------------

class TriageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownProduct : public TriageError {
public:
    using TriageError::TriageError;
};

class NoSnapshot : public TriageError {
public:
    using TriageError::TriageError;
};

/// Scan requested for a product without an active assignment.
class Unassigned : public TriageError {
public:
    using TriageError::TriageError;
};

class UnknownAlert : public TriageError {
public:
    using TriageError::TriageError;
};

/// A decision was requested for an alert that is no longer PENDING.
class AlreadyDecided : public TriageError {
public:
    using TriageError::TriageError;
};

/// The inventory file has no data rows.
class EmptyFile : public TriageError {
public:
    using TriageError::TriageError;
};

/// The inventory file as a whole cannot be read (bad header, not JSON, ...).
class FormatError : public TriageError {
public:
    using TriageError::TriageError;
};

class StoreError : public TriageError {
public:
    using TriageError::TriageError;
};

// Domain types ---------------------------------------------------------------

enum class AlertState { pending, confirmed, discarded };
enum class AssignmentSource { candidate_selected, user_edited };

std::string_view to_string(AlertState s) noexcept;
std::string_view to_string(AssignmentSource s) noexcept;
/// Accepts the upper-case names ("PENDING", "CANDIDATE_SELECTED", ...), case-insensitively.
std::optional<AlertState> parse_alert_state(std::string_view s);
std::optional<AssignmentSource> parse_assignment_source(std::string_view s);
std::optional<CveOrigin> parse_cve_origin(std::string_view s);

struct InventoryRecord {
    std::int64_t id = 0;
    std::string source;
    InventoryProduct product;
    std::string first_seen;
    std::string last_seen;
};

struct Assignment {
    std::int64_t id = 0;
    std::int64_t product_id = 0;
    Wfn wfn;
    /// Canonical URI binding of `wfn`; also the assignment key of its alerts.
    std::string uri;
    AssignmentSource source = AssignmentSource::candidate_selected;
    /// Candidate URI a USER_EDITED assignment started from, if any.
    std::optional<std::string> derived_from;
    std::string assigned_at;
    std::string assigned_by;
};

struct Alert {
    std::int64_t id = 0;
    std::int64_t product_id = 0;
    std::string cve_id;
    std::string assignment_key;
    CveOrigin origin = CveOrigin::cpe_list;
    /// Sorted, distinct.
    std::vector<std::string> matched_cpes;
    bool exact_version = false;
    std::string summary;
    std::optional<double> cvss_score;
    AlertState state = AlertState::pending;
    std::optional<std::string> decided_by;
    std::optional<std::string> decided_at;
    std::string created_at;
    /// "<product_id>:<group digest>"; alerts with equal matched CPE sets share it.
    std::string group_id;
};

struct AlertGroup {
    std::string group_id;
    std::vector<std::string> cpes;
    std::vector<Alert> members;
};

struct ProductView {
    InventoryRecord record;
    std::optional<Assignment> assignment;
};

struct ImportRowError {
    std::size_t row = 0;  ///< 1-based data row (header excluded)
    std::string reason;
};

struct ImportSummary {
    std::size_t rows = 0;
    std::size_t created = 0;
    std::size_t updated = 0;
    std::size_t unchanged = 0;
    std::vector<ImportRowError> errors;
};

struct CandidateList {
    std::int64_t product_id = 0;
    std::vector<CpeCandidate> candidates;
    /// Explicit marker for "the dictionary has nothing for this product".
    bool no_candidates = false;
};

struct AssignResult {
    Assignment assignment;
    /// False when the same WFN was already assigned (no-op).
    bool changed = false;
    /// PENDING alerts created by the rescan the assignment triggered.
    std::vector<Alert> new_alerts;
};

struct ScanResult {
    std::int64_t product_id = 0;
    std::size_t candidates = 0;
    std::vector<Alert> new_alerts;
};

struct RescanSummary {
    /// "unchanged", "updated", "rescanned" or "error".
    std::string status;
    std::string error;
    std::string snapshot_time;
    std::size_t products_scanned = 0;
    std::size_t new_alerts = 0;
};

struct ReportFilter {
    std::optional<std::string> vendor;       ///< case-insensitive substring of the raw vendor
    std::optional<AlertState> state;
    std::optional<std::string> since;        ///< alert created_at >= since (ISO-8601 text compare)
    std::optional<std::string> until;        ///< alert created_at <= until
    std::optional<std::string> status;       ///< "assigned" or "unassigned"
};

struct ReportProduct {
    InventoryRecord record;
    std::string status;                       ///< "assigned" / "unassigned"
    std::optional<std::string> assigned_uri;
    std::size_t pending = 0;
    std::size_t confirmed = 0;
    std::size_t discarded = 0;
};

struct Report {
    std::size_t products_total = 0;
    std::size_t products_assigned = 0;
    std::size_t products_unassigned = 0;
    std::size_t alerts_pending = 0;
    std::size_t alerts_confirmed = 0;
    std::size_t alerts_discarded = 0;
    std::vector<ReportProduct> products;
    std::vector<Alert> alerts;
};

/// Feed locations for scheduled rescans. Each entry is a path or http(s) URL.
struct FeedSources {
    std::string cpe_dictionary;
    std::vector<std::string> cve_feeds;

    bool empty() const noexcept { return cpe_dictionary.empty() && cve_feeds.empty(); }
};

struct TriageOptions {
    std::size_t max_distance = kDefaultMaxDistance;
    bool strict_summary = false;
    FeedSources feeds;
    /// When set, rebuilt snapshots are also written here.
    std::optional<std::filesystem::path> snapshot_dir;
    /// Returns the current time as ISO-8601 UTC text. Defaults to the system clock.
    std::function<std::string()> clock;
};

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now();

// Inventory files ------------------------------------------------------------

/// Parses an inventory file. CSV needs a header with vendor, product and
/// version columns (external_id optional, any order, RFC 4180 quoting). JSON is
/// an array of objects with the same keys, or {"products": [...]}. Rows with a
/// blank product or the wrong field count are reported in `errors`. A missing
/// external_id defaults to "vendor|product|version".
/// Throws EmptyFile or FormatError.
std::vector<InventoryProduct> parse_inventory(std::string_view content, std::vector<ImportRowError>& errors);

// Service --------------------------------------------------------------------

/// Store-backed triage workflow. Thread-safe: store access is serialized,
/// scans read a snapshot that is swapped atomically.
class TriageService {
public:
    /// Opens (or creates) the SQLite store at `store_path`; ":memory:" is allowed.
    TriageService(const std::string& store_path, TriageOptions options = {});
    ~TriageService();
    TriageService(const TriageService&) = delete;
    TriageService& operator=(const TriageService&) = delete;

    void set_snapshot(std::shared_ptr<const CatalogSnapshot> snapshot);
    std::shared_ptr<const CatalogSnapshot> snapshot() const;

    ImportSummary import_inventory(std::string_view content, const std::string& source = "file");
    ImportSummary import_inventory_file(const std::filesystem::path& path, const std::string& source = "file");

    /// status: nullopt, "assigned" or "unassigned". Ordered by id.
    std::vector<ProductView> list_products(const std::optional<std::string>& status = std::nullopt) const;
    ProductView get_product(std::int64_t product_id) const;

    CandidateList list_candidates(std::int64_t product_id, std::size_t limit = 10) const;

    AssignResult assign_cpe(std::int64_t product_id, const Wfn& wfn, AssignmentSource source,
                            const std::string& user, const std::optional<std::string>& derived_from = std::nullopt);

    ScanResult scan_product(std::int64_t product_id);

    /// Alerts under the product's active assignment, in triage order
    /// (exact-version CPE matches, other CPE matches, summary matches; CVE id within).
    std::vector<Alert> list_alerts(std::int64_t product_id, std::optional<AlertState> state = std::nullopt) const;
    std::vector<AlertGroup> list_alert_groups(std::int64_t product_id,
                                              std::optional<AlertState> state = std::nullopt) const;

    std::vector<Alert> set_alert_state(const std::vector<std::int64_t>& alert_ids, AlertState decision,
                                       const std::string& user);
    std::vector<Alert> set_group_state(const std::string& group_id, AlertState decision, const std::string& user);

    RescanSummary scheduled_rescan();

    Report report(const ReportFilter& filter = {}) const;

    const TriageOptions& options() const noexcept { return options_; }

private:
    std::string now() const;
    std::shared_ptr<const CatalogSnapshot> require_snapshot() const;
    ScanResult scan_locked(std::int64_t product_id, const CatalogSnapshot& snapshot);
    std::vector<Alert> decide_locked(std::vector<Alert> alerts, AlertState decision, const std::string& user);

    TriageOptions options_;
    std::unique_ptr<TriageStore> store_;
    mutable std::mutex store_mutex_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const CatalogSnapshot> snapshot_;
};

} // namespace iva
