#include "iva/triage.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace iva {

namespace {

std::string trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string default_external_id(const InventoryProduct& p)
{
    return p.vendor_raw + "|" + p.product_raw + "|" + p.version_raw;
}

bool is_blank(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// RFC 4180 records. Quoted fields may contain commas, doubled quotes and line
// breaks; CRLF and LF both end a record. Entirely blank lines are skipped.
std::vector<std::vector<std::string>> csv_records(std::string_view text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        if (!(record.size() == 1 && record[0].empty() && !field_started)) records.push_back(std::move(record));
        record.clear();
        field_started = false;
    };

    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field.push_back(c);
            }
            ++i;
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_record();
            ++i;
        } else if (c == '\n') {
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
        ++i;
    }
    if (quoted) throw FormatError("unterminated quoted field in CSV inventory");
    if (!field.empty() || !record.empty() || field_started) end_record();
    return records;
}

std::vector<InventoryProduct> parse_csv(std::string_view text, std::vector<ImportRowError>& errors)
{
    auto records = csv_records(text);
    if (records.empty()) throw EmptyFile("inventory file is empty");

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < records[0].size(); ++i) column[lower(trim(records[0][i]))] = i;
    for (const char* required : {"vendor", "product", "version"}) {
        if (!column.contains(required)) {
            throw FormatError(std::string("CSV inventory header lacks a '") + required + "' column");
        }
    }
    if (records.size() == 1) throw EmptyFile("inventory file has a header but no rows");

    auto ext = column.find("external_id");
    std::vector<InventoryProduct> out;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != records[0].size()) {
            errors.push_back({r, "expected " + std::to_string(records[0].size()) + " fields, found " +
                                     std::to_string(rec.size())});
            continue;
        }
        InventoryProduct p;
        p.vendor_raw = trim(rec[column["vendor"]]);
        p.product_raw = trim(rec[column["product"]]);
        p.version_raw = trim(rec[column["version"]]);
        if (ext != column.end()) p.external_id = trim(rec[ext->second]);
        if (is_blank(p.product_raw)) {
            errors.push_back({r, "blank product"});
            continue;
        }
        if (p.external_id.empty()) p.external_id = default_external_id(p);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<InventoryProduct> parse_json(std::string_view text, std::vector<ImportRowError>& errors)
{
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw FormatError("inventory file is not valid JSON");
    if (doc.is_object() && doc.contains("products")) doc = doc["products"];
    if (!doc.is_array()) throw FormatError("JSON inventory must be an array of products");
    if (doc.empty()) throw EmptyFile("inventory file has no products");

    auto field = [](const nlohmann::json& obj, const char* key) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::string();
        if (it->is_string()) return trim(it->get<std::string>());
        if (it->is_number()) return it->dump();
        return std::nullopt;
    };

    std::vector<InventoryProduct> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& row = doc[i];
        if (!row.is_object()) {
            errors.push_back({i + 1, "not an object"});
            continue;
        }
        auto vendor = field(row, "vendor");
        auto product = field(row, "product");
        auto version = field(row, "version");
        auto ext = field(row, "external_id");
        if (!vendor || !product || !version || !ext) {
            errors.push_back({i + 1, "fields must be strings or numbers"});
            continue;
        }
        if (product->empty()) {
            errors.push_back({i + 1, "blank product"});
            continue;
        }
        InventoryProduct p{*ext, *vendor, *product, *version};
        if (p.external_id.empty()) p.external_id = default_external_id(p);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

std::vector<InventoryProduct> parse_inventory(std::string_view content, std::vector<ImportRowError>& errors)
{
    if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
    auto first = content.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) throw EmptyFile("inventory file is empty");
    if (content[first] == '[' || content[first] == '{') return parse_json(content, errors);
    return parse_csv(content, errors);
}

} // namespace iva
