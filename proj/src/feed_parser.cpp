#include "iva/feed_parser.hpp"

#include "xml_stream.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>

namespace iva {

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trimmed(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

// Collapses internal whitespace runs (feeds wrap long summaries).
std::string normalize_space(std::string_view s)
{
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

struct DictItem {
    std::string name;
    std::string formatted;
    std::string title;
    bool title_done = false;
    bool deprecated = false;
    std::string deprecated_by;
    std::string deprecated_by_fs;
    std::string reason;
};

CpeDictEntry finish_dict_item(DictItem& item)
{
    CpeDictEntry e;
    e.uri = lowercase(trimmed(item.name));
    e.wfn = unbind_uri(e.uri);
    if (!item.formatted.empty()) {
        auto fs = lowercase(trimmed(item.formatted));
        unbind_formatted_string(fs);
        e.formatted = std::move(fs);
    }
    e.title = normalize_space(item.title);
    e.deprecated = item.deprecated || !item.deprecated_by.empty() || !item.deprecated_by_fs.empty();
    if (!item.deprecated_by.empty()) {
        auto target = lowercase(trimmed(item.deprecated_by));
        unbind_uri(target);
        e.deprecated_by = std::move(target);
    } else if (!item.deprecated_by_fs.empty()) {
        e.deprecated_by = bind_to_uri(unbind_formatted_string(lowercase(trimmed(item.deprecated_by_fs))));
    }
    if (e.deprecated) e.deprecation_reason = item.reason;
    return e;
}

} // namespace

DictionaryParseResult parse_cpe_dictionary(std::istream& source)
{
    DictionaryParseResult result;
    std::optional<DictItem> item;
    std::string* capture = nullptr;
    std::string title_buffer;

    xml::Callbacks cb;
    cb.on_start = [&](std::string_view name, const xml::Attributes& attrs) {
        if (name == "cpe-item") {
            item.emplace();
            item->name = std::string(xml::attribute(attrs, "name"));
            item->deprecated = xml::attribute(attrs, "deprecated") == "true";
            item->deprecated_by = std::string(xml::attribute(attrs, "deprecated_by"));
            ++result.items_seen;
            return;
        }
        if (!item) return;
        if (name == "title" && !item->title_done) {
            title_buffer.clear();
            capture = &title_buffer;
        } else if (name == "cpe23-item") {
            item->formatted = std::string(xml::attribute(attrs, "name"));
        } else if (name == "deprecation") {
            item->deprecated = true;
        } else if (name == "deprecated-by") {
            item->deprecated = true;
            item->deprecated_by_fs = std::string(xml::attribute(attrs, "name"));
            item->reason = std::string(xml::attribute(attrs, "type"));
        }
    };
    cb.on_text = [&](std::string_view text) {
        if (capture != nullptr) capture->append(text);
    };
    cb.on_end = [&](std::string_view name) {
        if (!item) return;
        if (name == "title" && capture == &title_buffer) {
            item->title = title_buffer;
            item->title_done = true;
            capture = nullptr;
        } else if (name == "cpe-item") {
            try {
                result.entries.push_back(finish_dict_item(*item));
            } catch (const std::exception& e) {
                spdlog::warn("skipping cpe-item '{}': {}", item->name, e.what());
                result.skipped.push_back({item->name, e.what()});
            }
            item.reset();
        }
    };

    xml::parse(source, cb);
    return result;
}

namespace {

struct FeedItem {
    std::string id;
    std::string cve_id;
    std::string summary;
    std::string published;
    std::string score;
    std::vector<std::string> products;
};

} // namespace

CveFeedParseResult parse_cve_feed(std::istream& source)
{
    CveFeedParseResult result;
    std::optional<FeedItem> item;
    std::string* capture = nullptr;
    std::string product_buffer;
    bool in_software_list = false;
    bool in_cvss = false;

    xml::Callbacks cb;
    cb.on_start = [&](std::string_view name, const xml::Attributes& attrs) {
        if (name == "entry") {
            item.emplace();
            item->id = std::string(xml::attribute(attrs, "id"));
            ++result.entries_seen;
            return;
        }
        if (!item) return;
        if (name == "vulnerable-software-list") {
            in_software_list = true;
        } else if (name == "product" && in_software_list) {
            product_buffer.clear();
            capture = &product_buffer;
        } else if (name == "summary") {
            capture = &item->summary;
        } else if (name == "published-datetime") {
            capture = &item->published;
        } else if (name == "cve-id") {
            capture = &item->cve_id;
        } else if (name == "cvss") {
            in_cvss = true;
        } else if (name == "score" && in_cvss) {
            capture = &item->score;
        }
    };
    cb.on_text = [&](std::string_view text) {
        if (capture != nullptr) capture->append(text);
    };
    cb.on_end = [&](std::string_view name) {
        if (!item) return;
        if (name == "product" && capture == &product_buffer) {
            item->products.push_back(trimmed(product_buffer));
            capture = nullptr;
        } else if (name == "vulnerable-software-list") {
            in_software_list = false;
        } else if (name == "cvss") {
            in_cvss = false;
        } else if (name == "summary" || name == "published-datetime" || name == "cve-id" ||
                   name == "score") {
            capture = nullptr;
        } else if (name == "entry") {
            std::string id = trimmed(item->id.empty() ? item->cve_id : item->id);
            if (!is_valid_cve_id(id)) {
                spdlog::warn("skipping feed entry with invalid id '{}'", id);
                result.skipped.push_back({id, "invalid CVE id"});
                item.reset();
                return;
            }
            CveEntry e;
            e.id = id;
            e.summary = normalize_space(item->summary);
            e.published = trimmed(item->published);
            auto score = trimmed(item->score);
            if (!score.empty()) {
                double v = 0.0;
                auto [p, ec] = std::from_chars(score.data(), score.data() + score.size(), v);
                if (ec == std::errc{} && p == score.data() + score.size() && v >= 0.0 && v <= 10.0) {
                    e.cvss_score = v;
                }
            }
            std::set<std::string> seen;
            for (const auto& raw : item->products) {
                auto uri = lowercase(raw);
                try {
                    auto wfn = unbind_uri(uri);
                    if (seen.insert(uri).second) e.vuln_software.push_back({uri, std::move(wfn)});
                } catch (const std::exception& ex) {
                    spdlog::warn("{}: skipping vulnerable-software entry '{}': {}", id, raw, ex.what());
                    result.skipped_cpes.push_back({id + " " + raw, ex.what()});
                }
            }
            result.entries.push_back(std::move(e));
            item.reset();
        }
    };

    xml::parse(source, cb);
    return result;
}

} // namespace iva
