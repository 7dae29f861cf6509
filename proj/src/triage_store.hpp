#pragma once

// SQLite persistence for the triage service. Schema (version 1):
//
//   meta(key PK, value)                       schema_version, feed stamps
//   products(id PK, source, external_id, vendor, product, version,
//            first_seen, last_seen)           UNIQUE(source, external_id)
//   assignments(id PK, product_id, uri, formatted, source, derived_from,
//               assigned_at, assigned_by, active)
//                                             at most one active row per product
//   alerts(id PK, product_id, cve_id, assignment_key, origin, matched_cpes,
//          exact_version, summary, cvss_score, state, decided_by, decided_at,
//          created_at, group_digest)          UNIQUE(product_id, cve_id, assignment_key)
//
// A trigger rejects any state change of an alert that is no longer PENDING.

#include "iva/triage.hpp"

#include <sqlite3.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iva {

inline constexpr int kStoreSchemaVersion = 1;

class Statement;

class TriageStore {
public:
    explicit TriageStore(const std::string& path);
    ~TriageStore();
    TriageStore(const TriageStore&) = delete;
    TriageStore& operator=(const TriageStore&) = delete;

    /// RAII transaction; rolls back unless commit() was called.
    class Transaction {
    public:
        explicit Transaction(TriageStore& store);
        ~Transaction();
        void commit();

    private:
        TriageStore& store_;
        bool done_ = false;
    };

    std::optional<std::string> meta(const std::string& key) const;
    void set_meta(const std::string& key, const std::string& value);

    enum class Upsert { created, updated, unchanged };
    Upsert upsert_product(const std::string& source, const InventoryProduct& p, const std::string& now);
    std::optional<InventoryRecord> product(std::int64_t id) const;
    std::vector<InventoryRecord> products() const;

    std::optional<Assignment> active_assignment(std::int64_t product_id) const;
    std::vector<Assignment> active_assignments() const;
    void deactivate_assignments(std::int64_t product_id);
    std::int64_t insert_assignment(const Assignment& a);

    void delete_pending_alerts(std::int64_t product_id, const std::string& assignment_key);
    /// Inserts unless (product, cve, assignment_key) exists. Returns the new id.
    std::optional<std::int64_t> insert_alert(const Alert& a);
    std::optional<Alert> alert(std::int64_t id) const;
    std::vector<Alert> alerts(std::int64_t product_id, const std::string& assignment_key) const;
    void update_alert_state(std::int64_t id, AlertState state, const std::string& user, const std::string& at);

private:
    friend class Statement;
    void exec(const char* sql);
    [[noreturn]] void fail(const std::string& what) const;

    sqlite3* db_ = nullptr;
};

} // namespace iva
