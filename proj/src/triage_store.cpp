#include "triage_store.hpp"

#include "json.hpp"

namespace iva {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta (
  key   TEXT PRIMARY KEY,
  value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS products (
  id          INTEGER PRIMARY KEY AUTOINCREMENT,
  source      TEXT NOT NULL,
  external_id TEXT NOT NULL,
  vendor      TEXT NOT NULL,
  product     TEXT NOT NULL,
  version     TEXT NOT NULL,
  first_seen  TEXT NOT NULL,
  last_seen   TEXT NOT NULL,
  UNIQUE (source, external_id)
);
CREATE TABLE IF NOT EXISTS assignments (
  id           INTEGER PRIMARY KEY AUTOINCREMENT,
  product_id   INTEGER NOT NULL REFERENCES products(id),
  uri          TEXT NOT NULL,
  formatted    TEXT NOT NULL,
  source       TEXT NOT NULL CHECK (source IN ('CANDIDATE_SELECTED', 'USER_EDITED')),
  derived_from TEXT,
  assigned_at  TEXT NOT NULL,
  assigned_by  TEXT NOT NULL,
  active       INTEGER NOT NULL
);
CREATE UNIQUE INDEX IF NOT EXISTS assignments_one_active ON assignments(product_id) WHERE active = 1;
CREATE TABLE IF NOT EXISTS alerts (
  id             INTEGER PRIMARY KEY AUTOINCREMENT,
  product_id     INTEGER NOT NULL REFERENCES products(id),
  cve_id         TEXT NOT NULL,
  assignment_key TEXT NOT NULL,
  origin         TEXT NOT NULL CHECK (origin IN ('CPE_LIST', 'SUMMARY')),
  matched_cpes   TEXT NOT NULL,
  exact_version  INTEGER NOT NULL,
  summary        TEXT NOT NULL,
  cvss_score     REAL,
  state          TEXT NOT NULL CHECK (state IN ('PENDING', 'CONFIRMED', 'DISCARDED')),
  decided_by     TEXT,
  decided_at     TEXT,
  created_at     TEXT NOT NULL,
  group_digest   TEXT NOT NULL,
  UNIQUE (product_id, cve_id, assignment_key)
);
CREATE INDEX IF NOT EXISTS alerts_by_assignment ON alerts(product_id, assignment_key);
CREATE TRIGGER IF NOT EXISTS alerts_decisions_are_final
BEFORE UPDATE OF state ON alerts
WHEN OLD.state <> 'PENDING'
BEGIN
  SELECT RAISE(ABORT, 'alert already decided');
END;
)sql";

std::string group_key(const Alert& a)
{
    if (a.origin == CveOrigin::summary) return "summary";
    std::string key;
    for (const auto& u : a.matched_cpes) {
        if (!key.empty()) key.push_back('\n');
        key += u;
    }
    return key;
}

} // namespace

class Statement {
public:
    Statement(const TriageStore& store, const char* sql) : store_(store)
    {
        if (sqlite3_prepare_v2(store.db_, sql, -1, &stmt_, nullptr) != SQLITE_OK) store.fail("prepare");
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& bind(int i, const std::string& v)
    {
        check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int i, std::int64_t v)
    {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Statement& bind(int i, const std::optional<std::string>& v)
    {
        return v ? bind(i, *v) : bind_null(i);
    }
    Statement& bind(int i, const std::optional<double>& v)
    {
        if (!v) return bind_null(i);
        check(sqlite3_bind_double(stmt_, i, *v));
        return *this;
    }
    Statement& bind_null(int i)
    {
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }

    /// True while a row is available.
    bool step()
    {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        store_.fail("step");
    }

    std::string text(int col) const
    {
        auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
        return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
    }
    std::optional<std::string> opt_text(int col) const
    {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
        return text(col);
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
    std::optional<double> opt_real(int col) const
    {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
        return sqlite3_column_double(stmt_, col);
    }

private:
    void check(int rc)
    {
        if (rc != SQLITE_OK) store_.fail("bind");
    }

    const TriageStore& store_;
    sqlite3_stmt* stmt_ = nullptr;
};

namespace {

constexpr const char* kProductColumns =
    "id, source, external_id, vendor, product, version, first_seen, last_seen";
constexpr const char* kAssignmentColumns =
    "id, product_id, formatted, uri, source, derived_from, assigned_at, assigned_by";
constexpr const char* kAlertColumns =
    "id, product_id, cve_id, assignment_key, origin, matched_cpes, exact_version, summary, cvss_score, "
    "state, decided_by, decided_at, created_at, group_digest";

InventoryRecord read_product(const Statement& s)
{
    return InventoryRecord{s.integer(0), s.text(1), {s.text(2), s.text(3), s.text(4), s.text(5)},
                           s.text(6), s.text(7)};
}

Assignment read_assignment(const Statement& s)
{
    Assignment a;
    a.id = s.integer(0);
    a.product_id = s.integer(1);
    a.wfn = unbind_formatted_string(s.text(2));
    a.uri = s.text(3);
    a.source = parse_assignment_source(s.text(4)).value_or(AssignmentSource::candidate_selected);
    a.derived_from = s.opt_text(5);
    a.assigned_at = s.text(6);
    a.assigned_by = s.text(7);
    return a;
}

Alert read_alert(const Statement& s)
{
    Alert a;
    a.id = s.integer(0);
    a.product_id = s.integer(1);
    a.cve_id = s.text(2);
    a.assignment_key = s.text(3);
    a.origin = parse_cve_origin(s.text(4)).value_or(CveOrigin::cpe_list);
    a.matched_cpes = nlohmann::json::parse(s.text(5)).get<std::vector<std::string>>();
    a.exact_version = s.integer(6) != 0;
    a.summary = s.text(7);
    a.cvss_score = s.opt_real(8);
    a.state = parse_alert_state(s.text(9)).value_or(AlertState::pending);
    a.decided_by = s.opt_text(10);
    a.decided_at = s.opt_text(11);
    a.created_at = s.text(12);
    a.group_id = std::to_string(a.product_id) + ":" + s.text(13);
    return a;
}

std::string select(const char* columns, const char* table, const char* rest)
{
    return std::string("SELECT ") + columns + " FROM " + table + " " + rest;
}

} // namespace

TriageStore::TriageStore(const std::string& path)
{
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open store " + path + ": " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA foreign_keys = ON");
    exec(kSchema);
    auto version = meta("schema_version");
    if (!version) {
        set_meta("schema_version", std::to_string(kStoreSchemaVersion));
    } else if (*version != std::to_string(kStoreSchemaVersion)) {
        throw StoreError("unsupported store schema version " + *version);
    }
}

TriageStore::~TriageStore()
{
    sqlite3_close(db_);
}

void TriageStore::exec(const char* sql)
{
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError(msg);
    }
}

void TriageStore::fail(const std::string& what) const
{
    throw StoreError("store " + what + ": " + sqlite3_errmsg(db_));
}

TriageStore::Transaction::Transaction(TriageStore& store) : store_(store)
{
    store_.exec("BEGIN IMMEDIATE");
}

TriageStore::Transaction::~Transaction()
{
    if (!done_) {
        try {
            store_.exec("ROLLBACK");
        } catch (...) {
        }
    }
}

void TriageStore::Transaction::commit()
{
    store_.exec("COMMIT");
    done_ = true;
}

std::optional<std::string> TriageStore::meta(const std::string& key) const
{
    Statement s(*this, "SELECT value FROM meta WHERE key = ?");
    s.bind(1, key);
    if (!s.step()) return std::nullopt;
    return s.text(0);
}

void TriageStore::set_meta(const std::string& key, const std::string& value)
{
    Statement s(*this, "INSERT INTO meta(key, value) VALUES(?, ?) ON CONFLICT(key) DO UPDATE SET value = excluded.value");
    s.bind(1, key).bind(2, value).step();
}

TriageStore::Upsert TriageStore::upsert_product(const std::string& source, const InventoryProduct& p,
                                                const std::string& now)
{
    Statement find(*this, "SELECT id, vendor, product, version FROM products WHERE source = ? AND external_id = ?");
    find.bind(1, source).bind(2, p.external_id);
    if (!find.step()) {
        Statement ins(*this,
                      "INSERT INTO products(source, external_id, vendor, product, version, first_seen, last_seen) "
                      "VALUES(?, ?, ?, ?, ?, ?, ?)");
        ins.bind(1, source).bind(2, p.external_id).bind(3, p.vendor_raw).bind(4, p.product_raw);
        ins.bind(5, p.version_raw).bind(6, now).bind(7, now).step();
        return Upsert::created;
    }
    auto id = find.integer(0);
    bool same = find.text(1) == p.vendor_raw && find.text(2) == p.product_raw && find.text(3) == p.version_raw;
    Statement upd(*this, "UPDATE products SET vendor = ?, product = ?, version = ?, last_seen = ? WHERE id = ?");
    upd.bind(1, p.vendor_raw).bind(2, p.product_raw).bind(3, p.version_raw).bind(4, now).bind(5, id).step();
    return same ? Upsert::unchanged : Upsert::updated;
}

std::optional<InventoryRecord> TriageStore::product(std::int64_t id) const
{
    Statement s(*this, select(kProductColumns, "products", "WHERE id = ?").c_str());
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_product(s);
}

std::vector<InventoryRecord> TriageStore::products() const
{
    Statement s(*this, select(kProductColumns, "products", "ORDER BY id").c_str());
    std::vector<InventoryRecord> out;
    while (s.step()) out.push_back(read_product(s));
    return out;
}

std::optional<Assignment> TriageStore::active_assignment(std::int64_t product_id) const
{
    Statement s(*this, select(kAssignmentColumns, "assignments", "WHERE product_id = ? AND active = 1").c_str());
    s.bind(1, product_id);
    if (!s.step()) return std::nullopt;
    return read_assignment(s);
}

std::vector<Assignment> TriageStore::active_assignments() const
{
    Statement s(*this, select(kAssignmentColumns, "assignments", "WHERE active = 1 ORDER BY product_id").c_str());
    std::vector<Assignment> out;
    while (s.step()) out.push_back(read_assignment(s));
    return out;
}

void TriageStore::deactivate_assignments(std::int64_t product_id)
{
    Statement s(*this, "UPDATE assignments SET active = 0 WHERE product_id = ? AND active = 1");
    s.bind(1, product_id).step();
}

std::int64_t TriageStore::insert_assignment(const Assignment& a)
{
    Statement s(*this,
                "INSERT INTO assignments(product_id, uri, formatted, source, derived_from, assigned_at, assigned_by, "
                "active) VALUES(?, ?, ?, ?, ?, ?, ?, 1)");
    s.bind(1, a.product_id).bind(2, a.uri).bind(3, bind_to_formatted_string(a.wfn));
    s.bind(4, std::string(to_string(a.source))).bind(5, a.derived_from).bind(6, a.assigned_at);
    s.bind(7, a.assigned_by).step();
    return sqlite3_last_insert_rowid(db_);
}

void TriageStore::delete_pending_alerts(std::int64_t product_id, const std::string& assignment_key)
{
    Statement s(*this, "DELETE FROM alerts WHERE product_id = ? AND assignment_key = ? AND state = 'PENDING'");
    s.bind(1, product_id).bind(2, assignment_key).step();
}

std::optional<std::int64_t> TriageStore::insert_alert(const Alert& a)
{
    Statement s(*this,
                "INSERT OR IGNORE INTO alerts(product_id, cve_id, assignment_key, origin, matched_cpes, "
                "exact_version, summary, cvss_score, state, created_at, group_digest) "
                "VALUES(?, ?, ?, ?, ?, ?, ?, ?, 'PENDING', ?, ?)");
    s.bind(1, a.product_id).bind(2, a.cve_id).bind(3, a.assignment_key);
    s.bind(4, std::string(to_string(a.origin))).bind(5, nlohmann::json(a.matched_cpes).dump());
    s.bind(6, std::int64_t{a.exact_version ? 1 : 0}).bind(7, a.summary).bind(8, a.cvss_score);
    s.bind(9, a.created_at).bind(10, group_digest(group_key(a)));
    s.step();
    if (sqlite3_changes(db_) == 0) return std::nullopt;
    return sqlite3_last_insert_rowid(db_);
}

std::optional<Alert> TriageStore::alert(std::int64_t id) const
{
    Statement s(*this, select(kAlertColumns, "alerts", "WHERE id = ?").c_str());
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_alert(s);
}

std::vector<Alert> TriageStore::alerts(std::int64_t product_id, const std::string& assignment_key) const
{
    Statement s(*this, select(kAlertColumns, "alerts", "WHERE product_id = ? AND assignment_key = ?").c_str());
    s.bind(1, product_id).bind(2, assignment_key);
    std::vector<Alert> out;
    while (s.step()) out.push_back(read_alert(s));
    return out;
}

void TriageStore::update_alert_state(std::int64_t id, AlertState state, const std::string& user,
                                     const std::string& at)
{
    Statement s(*this, "UPDATE alerts SET state = ?, decided_by = ?, decided_at = ? WHERE id = ?");
    s.bind(1, std::string(to_string(state))).bind(2, user).bind(3, at).bind(4, id).step();
}

} // namespace iva
