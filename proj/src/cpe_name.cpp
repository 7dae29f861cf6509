#include "iva/cpe_name.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace iva {

namespace {

constexpr std::string_view kUriPrefix = "cpe:/";
constexpr std::string_view kFsPrefix = "cpe:2.3:";

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    c = lower(c);
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// ---- URI component coding ------------------------------------------------

AttributeValue decode_uri_component(std::string_view comp)
{
    if (comp.empty()) return AttributeValue::any();
    if (comp == "-") return AttributeValue::na();

    std::string text;
    text.reserve(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
        char c = comp[i];
        if (c == '%') {
            if (i + 2 >= comp.size()) {
                throw MalformedUri("truncated percent-encoding in '" + std::string(comp) + "'");
            }
            int hi = hex_value(comp[i + 1]);
            int lo = hex_value(comp[i + 2]);
            if (hi < 0 || lo < 0) {
                throw MalformedUri("invalid percent-encoding in '" + std::string(comp) + "'");
            }
            int code = hi * 16 + lo;
            if (code == 0x01) {
                text.push_back('?');
            } else if (code == 0x02) {
                text.push_back('*');
            } else if (code < 0x21 || code > 0x7e) {
                throw MalformedUri("percent-encoded character out of range in '" +
                                   std::string(comp) + "'");
            } else {
                text.push_back(lower(static_cast<char>(code)));
            }
            i += 2;
        } else if (std::isspace(static_cast<unsigned char>(c)) ||
                   std::iscntrl(static_cast<unsigned char>(c))) {
            throw MalformedUri("whitespace or control character in '" + std::string(comp) + "'");
        } else {
            text.push_back(lower(c));
        }
    }
    if (text == "*") return AttributeValue::any();
    return AttributeValue::str(text);
}

std::string encode_uri_component(const AttributeValue& v)
{
    if (v.is_any()) return {};
    if (v.is_na()) return "-";
    const auto& t = v.text();
    if (t == "-") return "%2d";
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(t.size());
    for (char c : t) {
        if (is_alnum(c) || c == '.' || c == '-' || c == '_' || c == '*' || c == '?') {
            out.push_back(c);
        } else {
            auto u = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(kHex[u >> 4]);
            out.push_back(kHex[u & 0x0f]);
        }
    }
    return out;
}

void set_part(Wfn& wfn, AttributeValue v, bool uri)
{
    try {
        wfn.set(Attribute::part, std::move(v));
    } catch (const InvalidWfn& e) {
        if (uri) throw MalformedUri(e.what());
        throw MalformedFormattedString(e.what());
    }
}

// ---- formatted string coding ---------------------------------------------

// Splits on unescaped ':'.
std::vector<std::string> split_fs_fields(std::string_view s)
{
    std::vector<std::string> out(1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\\') {
            if (i + 1 >= s.size()) throw MalformedFormattedString("dangling escape");
            out.back().push_back(c);
            out.back().push_back(s[++i]);
        } else if (c == ':') {
            out.emplace_back();
        } else {
            out.back().push_back(c);
        }
    }
    return out;
}

AttributeValue decode_fs_field(std::string_view field)
{
    if (field.empty()) throw MalformedFormattedString("empty field");
    if (field == "*") return AttributeValue::any();
    if (field == "-") return AttributeValue::na();
    std::string text;
    text.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        char c = field[i];
        if (c == '\\') {
            text.push_back(lower(field[++i]));
        } else if (std::isspace(static_cast<unsigned char>(c)) ||
                   std::iscntrl(static_cast<unsigned char>(c))) {
            throw MalformedFormattedString("whitespace or control character in '" +
                                           std::string(field) + "'");
        } else {
            text.push_back(lower(c));
        }
    }
    return AttributeValue::str(text);
}

std::string encode_fs_field(const AttributeValue& v)
{
    if (v.is_any()) return "*";
    if (v.is_na()) return "-";
    const auto& t = v.text();
    if (t == "-") return "\\-";
    std::string out;
    out.reserve(t.size());
    for (char c : t) {
        if (is_alnum(c) || c == '.' || c == '-' || c == '_' || c == '*' || c == '?') {
            out.push_back(c);
        } else {
            out.push_back('\\');
            out.push_back(c);
        }
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

AttributeValue AttributeValue::na()
{
    AttributeValue v;
    v.kind_ = Kind::na;
    return v;
}

AttributeValue AttributeValue::str(std::string_view text)
{
    if (text.empty()) throw InvalidWfn("empty attribute string");
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isupper(u)) throw InvalidWfn("uppercase character in '" + std::string(text) + "'");
        if (std::isspace(u) || std::iscntrl(u) || u > 0x7e) {
            throw InvalidWfn("whitespace or non-printable character in '" + std::string(text) + "'");
        }
    }
    if (text == "*") throw InvalidWfn("'*' alone is the logical value ANY");
    AttributeValue v;
    v.kind_ = Kind::string;
    v.text_ = std::string(text);
    return v;
}

std::string_view attribute_name(Attribute a) noexcept
{
    static constexpr std::array<std::string_view, kAttributeCount> kNames{
        "part",     "vendor",     "product",   "version",   "update", "edition",
        "language", "sw_edition", "target_sw", "target_hw", "other",
    };
    return kNames[static_cast<std::size_t>(a)];
}

Wfn& Wfn::set(Attribute a, AttributeValue value)
{
    if (a == Attribute::part && value.is_string()) {
        const auto& t = value.text();
        if (t != "a" && t != "o" && t != "h") {
            throw InvalidWfn("invalid part '" + t + "' (expected a, o or h)");
        }
    }
    values_[static_cast<std::size_t>(a)] = std::move(value);
    return *this;
}

Wfn unbind_uri(std::string_view uri)
{
    if (uri.size() < kUriPrefix.size() ||
        !std::equal(kUriPrefix.begin(), kUriPrefix.end(), uri.begin(),
                    [](char a, char b) { return a == lower(b); })) {
        throw MalformedUri("URI does not start with 'cpe:/': '" + std::string(uri) + "'");
    }
    auto comps = split(uri.substr(kUriPrefix.size()), ':');
    if (comps.size() > 7) {
        throw MalformedUri("more than 7 components in '" + std::string(uri) + "'");
    }

    Wfn wfn;
    static constexpr std::array<Attribute, 5> kLeading{
        Attribute::part, Attribute::vendor, Attribute::product, Attribute::version,
        Attribute::update,
    };
    for (std::size_t i = 0; i < kLeading.size() && i < comps.size(); ++i) {
        auto value = decode_uri_component(comps[i]);
        if (kLeading[i] == Attribute::part) {
            set_part(wfn, std::move(value), true);
        } else {
            wfn.set(kLeading[i], std::move(value));
        }
    }

    bool language_from_pack = false;
    if (comps.size() > 5) {
        auto edition = comps[5];
        if (edition.find('~') != std::string_view::npos) {
            auto slots = split(edition, '~');
            if (slots.size() != 6) {
                throw MalformedUri("packed edition must have 6 tilde-separated slots in '" +
                                   std::string(uri) + "'");
            }
            if (!slots[0].empty()) {
                wfn.set(Attribute::language, decode_uri_component(slots[0]));
                language_from_pack = true;
            }
            wfn.set(Attribute::edition, decode_uri_component(slots[1]));
            wfn.set(Attribute::sw_edition, decode_uri_component(slots[2]));
            wfn.set(Attribute::target_sw, decode_uri_component(slots[3]));
            wfn.set(Attribute::target_hw, decode_uri_component(slots[4]));
            wfn.set(Attribute::other, decode_uri_component(slots[5]));
        } else {
            wfn.set(Attribute::edition, decode_uri_component(edition));
        }
    }
    if (comps.size() > 6) {
        auto language = decode_uri_component(comps[6]);
        if (language_from_pack && !language.is_any()) {
            throw MalformedUri("language given twice in '" + std::string(uri) + "'");
        }
        if (!language_from_pack) wfn.set(Attribute::language, std::move(language));
    }
    return wfn;
}

Wfn unbind_formatted_string(std::string_view fs)
{
    if (fs.size() < kFsPrefix.size() ||
        !std::equal(kFsPrefix.begin(), kFsPrefix.end(), fs.begin(),
                    [](char a, char b) { return a == lower(b); })) {
        throw MalformedFormattedString("formatted string does not start with 'cpe:2.3:': '" +
                                       std::string(fs) + "'");
    }
    auto fields = split_fs_fields(fs.substr(kFsPrefix.size()));
    if (fields.size() != kAttributeCount) {
        throw MalformedFormattedString("expected 11 fields, got " + std::to_string(fields.size()) +
                                       " in '" + std::string(fs) + "'");
    }
    Wfn wfn;
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
        AttributeValue v;
        try {
            v = decode_fs_field(fields[i]);
        } catch (const InvalidWfn& e) {
            throw MalformedFormattedString(e.what());
        }
        if (kAllAttributes[i] == Attribute::part) {
            set_part(wfn, std::move(v), false);
        } else {
            wfn.set(kAllAttributes[i], std::move(v));
        }
    }
    return wfn;
}

std::string bind_to_uri(const Wfn& wfn)
{
    std::vector<std::string> comps;
    comps.reserve(7);
    for (auto a : {Attribute::part, Attribute::vendor, Attribute::product, Attribute::version,
                   Attribute::update}) {
        comps.push_back(encode_uri_component(wfn[a]));
    }
    bool pack = !wfn[Attribute::sw_edition].is_any() || !wfn[Attribute::target_sw].is_any() ||
                !wfn[Attribute::target_hw].is_any() || !wfn[Attribute::other].is_any();
    if (pack) {
        std::string edition = encode_uri_component(wfn[Attribute::language]);
        for (auto a : {Attribute::edition, Attribute::sw_edition, Attribute::target_sw,
                       Attribute::target_hw, Attribute::other}) {
            edition.push_back('~');
            edition += encode_uri_component(wfn[a]);
        }
        comps.push_back(std::move(edition));
    } else {
        comps.push_back(encode_uri_component(wfn[Attribute::edition]));
        comps.push_back(encode_uri_component(wfn[Attribute::language]));
    }
    while (comps.size() > 1 && comps.back().empty()) comps.pop_back();

    std::string out(kUriPrefix);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (i > 0) out.push_back(':');
        out += comps[i];
    }
    return out;
}

std::string bind_to_formatted_string(const Wfn& wfn)
{
    std::string out(kFsPrefix);
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
        if (i > 0) out.push_back(':');
        out += encode_fs_field(wfn[kAllAttributes[i]]);
    }
    return out;
}

std::string to_wfn_text(const Wfn& wfn)
{
    std::string out;
    for (std::size_t i = 0; i < kAttributeCount; ++i) {
        if (i > 0) out += ", ";
        auto a = kAllAttributes[i];
        out += attribute_name(a);
        out.push_back(':');
        const auto& v = wfn[a];
        if (v.is_any()) {
            out += "ANY";
        } else if (v.is_na()) {
            out += "NA";
        } else {
            out += v.text();
        }
    }
    return out;
}

Wfn parse_wfn_text(std::string_view text)
{
    Wfn wfn;
    std::array<bool, kAttributeCount> seen{};
    for (auto item : split(text, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string_view::npos) {
            throw InvalidWfn("expected 'attribute:value', got '" + std::string(item) + "'");
        }
        auto name = trim(item.substr(0, colon));
        auto value = trim(item.substr(colon + 1));
        auto it = std::find_if(kAllAttributes.begin(), kAllAttributes.end(),
                               [&](Attribute a) { return attribute_name(a) == name; });
        if (it == kAllAttributes.end()) {
            throw InvalidWfn("unknown attribute '" + std::string(name) + "'");
        }
        auto idx = static_cast<std::size_t>(*it);
        if (seen[idx]) throw InvalidWfn("attribute '" + std::string(name) + "' given twice");
        seen[idx] = true;

        if (value == "ANY" || value == "*") {
            wfn.set(*it, AttributeValue::any());
        } else if (value == "NA") {
            wfn.set(*it, AttributeValue::na());
        } else {
            std::string lowered(value);
            std::transform(lowered.begin(), lowered.end(), lowered.begin(), lower);
            std::replace(lowered.begin(), lowered.end(), ' ', '_');
            wfn.set(*it, AttributeValue::str(lowered));
        }
    }
    return wfn;
}

Wfn unbind_any(std::string_view name)
{
    if (name.size() >= kFsPrefix.size() &&
        std::equal(kFsPrefix.begin(), kFsPrefix.end(), name.begin(),
                   [](char a, char b) { return a == lower(b); })) {
        return unbind_formatted_string(name);
    }
    return unbind_uri(name);
}

std::string canonical_uri(std::string_view uri) { return bind_to_uri(unbind_uri(uri)); }

} // namespace iva
