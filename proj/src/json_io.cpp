#include "iva/json_io.hpp"

#include <algorithm>
#include <cctype>

namespace iva {

using nlohmann::json;

namespace {

json value_to_json(const AttributeValue& v)
{
    if (v.is_any()) return "ANY";
    if (v.is_na()) return "NA";
    return v.text();
}

template <class T>
json opt(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

json alerts_json(const std::vector<Alert>& alerts)
{
    json arr = json::array();
    for (const auto& a : alerts) arr.push_back(to_json(a));
    return arr;
}

} // namespace

json wfn_to_json(const Wfn& wfn)
{
    json j = json::object();
    for (auto a : kAllAttributes) j[std::string(attribute_name(a))] = value_to_json(wfn[a]);
    return j;
}

Wfn wfn_from_json(const json& j)
{
    if (!j.is_object()) throw InvalidWfn("WFN must be a JSON object");
    if (auto it = j.find("uri"); it != j.end()) {
        if (!it->is_string()) throw InvalidWfn("'uri' must be a string");
        return unbind_uri(it->get<std::string>());
    }
    if (auto it = j.find("fs"); it != j.end()) {
        if (!it->is_string()) throw InvalidWfn("'fs' must be a string");
        return unbind_formatted_string(it->get<std::string>());
    }
    Wfn wfn;
    for (const auto& [key, value] : j.items()) {
        auto it = std::find_if(kAllAttributes.begin(), kAllAttributes.end(),
                               [&](Attribute a) { return attribute_name(a) == key; });
        if (it == kAllAttributes.end()) throw InvalidWfn("unknown attribute '" + key + "'");
        if (!value.is_string()) throw InvalidWfn("attribute '" + key + "' must be a string");
        auto text = value.get<std::string>();
        if (text == "ANY" || text == "*") {
            wfn.set(*it, AttributeValue::any());
        } else if (text == "NA") {
            wfn.set(*it, AttributeValue::na());
        } else {
            std::transform(text.begin(), text.end(), text.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            std::replace(text.begin(), text.end(), ' ', '_');
            wfn.set(*it, AttributeValue::str(text));
        }
    }
    return wfn;
}

json to_json(const CpeCandidate& c)
{
    return json{
        {"rank", c.rank},
        {"uri", c.entry.uri},
        {"formatted", opt(c.entry.formatted)},
        {"title", c.entry.title},
        {"vendor_distance", c.vendor_distance},
        {"product_distance", c.product_distance},
        {"version_exact", c.version_affinity.exact},
        {"version_common_prefix", c.version_affinity.common_prefix},
    };
}

json to_json(const CveCandidate& c)
{
    json matched = json::array();
    for (const auto& m : c.matched_cpes) matched.push_back(m.uri);
    return json{
        {"cve_id", c.cve.id},
        {"origin", to_string(c.origin)},
        {"exact_version", c.exact_version},
        {"matched_cpes", std::move(matched)},
        {"summary", c.cve.summary},
        {"cvss_score", opt(c.cve.cvss_score)},
        {"published", c.cve.published},
    };
}

json to_json(const InventoryRecord& r)
{
    return json{
        {"id", r.id},
        {"source", r.source},
        {"external_id", r.product.external_id},
        {"vendor", r.product.vendor_raw},
        {"product", r.product.product_raw},
        {"version", r.product.version_raw},
        {"first_seen", r.first_seen},
        {"last_seen", r.last_seen},
    };
}

json to_json(const Assignment& a)
{
    return json{
        {"id", a.id},
        {"product_id", a.product_id},
        {"uri", a.uri},
        {"formatted", bind_to_formatted_string(a.wfn)},
        {"wfn", wfn_to_json(a.wfn)},
        {"source", to_string(a.source)},
        {"derived_from", opt(a.derived_from)},
        {"assigned_at", a.assigned_at},
        {"assigned_by", a.assigned_by},
    };
}

json to_json(const ProductView& p)
{
    json j = to_json(p.record);
    j["status"] = p.assignment ? "assigned" : "unassigned";
    j["assignment"] = p.assignment ? to_json(*p.assignment) : json(nullptr);
    return j;
}

json to_json(const Alert& a)
{
    return json{
        {"id", a.id},
        {"product_id", a.product_id},
        {"cve_id", a.cve_id},
        {"assignment", a.assignment_key},
        {"origin", to_string(a.origin)},
        {"matched_cpes", a.matched_cpes},
        {"exact_version", a.exact_version},
        {"summary", a.summary},
        {"cvss_score", opt(a.cvss_score)},
        {"state", to_string(a.state)},
        {"decided_by", opt(a.decided_by)},
        {"decided_at", opt(a.decided_at)},
        {"created_at", a.created_at},
        {"group_id", a.group_id},
    };
}

json to_json(const AlertGroup& g)
{
    return json{{"group_id", g.group_id}, {"cpes", g.cpes}, {"members", alerts_json(g.members)}};
}

json to_json(const ImportSummary& s)
{
    json errors = json::array();
    for (const auto& e : s.errors) errors.push_back({{"row", e.row}, {"reason", e.reason}});
    return json{{"rows", s.rows},       {"created", s.created},     {"updated", s.updated},
                {"unchanged", s.unchanged}, {"skipped", s.errors.size()}, {"errors", std::move(errors)}};
}

json to_json(const CandidateList& c)
{
    json arr = json::array();
    for (const auto& cand : c.candidates) arr.push_back(to_json(cand));
    return json{{"product_id", c.product_id}, {"candidates", std::move(arr)}, {"no_candidates", c.no_candidates}};
}

json to_json(const AssignResult& r)
{
    return json{{"assignment", to_json(r.assignment)}, {"changed", r.changed}, {"new_alerts", alerts_json(r.new_alerts)}};
}

json to_json(const ScanResult& r)
{
    return json{{"product_id", r.product_id}, {"candidates", r.candidates}, {"new_alerts", alerts_json(r.new_alerts)}};
}

json to_json(const RescanSummary& s)
{
    return json{
        {"status", s.status},
        {"error", s.error.empty() ? json(nullptr) : json(s.error)},
        {"snapshot_time", s.snapshot_time},
        {"products_scanned", s.products_scanned},
        {"new_alerts", s.new_alerts},
    };
}

json to_json(const Report& r)
{
    json products = json::array();
    for (const auto& p : r.products) {
        json row = to_json(p.record);
        row["status"] = p.status;
        row["assigned_uri"] = opt(p.assigned_uri);
        row["alerts"] = {{"pending", p.pending}, {"confirmed", p.confirmed}, {"discarded", p.discarded}};
        products.push_back(std::move(row));
    }
    return json{
        {"products_total", r.products_total},
        {"products_assigned", r.products_assigned},
        {"products_unassigned", r.products_unassigned},
        {"alerts", {{"pending", r.alerts_pending}, {"confirmed", r.alerts_confirmed}, {"discarded", r.alerts_discarded}}},
        {"products", std::move(products)},
        {"alert_list", alerts_json(r.alerts)},
    };
}

} // namespace iva
