#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iva {

/// Raised when a CPE URI (2.2 binding) cannot be unbound.
class MalformedUri : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a CPE 2.3 formatted string cannot be unbound.
class MalformedFormattedString : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a value would violate the WFN invariants.
class InvalidWfn : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One WFN attribute value: the logical values ANY and NA, or a lowercase
/// string which may carry the wildcards '*' and '?'.
class AttributeValue {
public:
    enum class Kind { any, na, string };

    AttributeValue() = default;

    static AttributeValue any() { return {}; }
    static AttributeValue na();
    /// Validates `text` against the STRING invariants; throws InvalidWfn.
    static AttributeValue str(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    bool is_any() const noexcept { return kind_ == Kind::any; }
    bool is_na() const noexcept { return kind_ == Kind::na; }
    bool is_string() const noexcept { return kind_ == Kind::string; }

    /// Empty unless is_string().
    const std::string& text() const noexcept { return text_; }

    friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

private:
    Kind kind_ = Kind::any;
    std::string text_;
};

enum class Attribute : std::size_t {
    part,
    vendor,
    product,
    version,
    update,
    edition,
    language,
    sw_edition,
    target_sw,
    target_hw,
    other,
};

inline constexpr std::size_t kAttributeCount = 11;

inline constexpr std::array<Attribute, kAttributeCount> kAllAttributes{
    Attribute::part,       Attribute::vendor,    Attribute::product,   Attribute::version,
    Attribute::update,     Attribute::edition,   Attribute::language,  Attribute::sw_edition,
    Attribute::target_sw,  Attribute::target_hw, Attribute::other,
};

std::string_view attribute_name(Attribute a) noexcept;

/// Well-formed CPE name. All eleven attributes are always present; a default
/// constructed Wfn is all-ANY.
class Wfn {
public:
    Wfn() = default;

    const AttributeValue& operator[](Attribute a) const noexcept
    {
        return values_[static_cast<std::size_t>(a)];
    }

    /// Throws InvalidWfn if `a` is part and the value is a STRING other than a/o/h.
    Wfn& set(Attribute a, AttributeValue value);

    const AttributeValue& part() const noexcept { return (*this)[Attribute::part]; }
    const AttributeValue& vendor() const noexcept { return (*this)[Attribute::vendor]; }
    const AttributeValue& product() const noexcept { return (*this)[Attribute::product]; }
    const AttributeValue& version() const noexcept { return (*this)[Attribute::version]; }
    const AttributeValue& update() const noexcept { return (*this)[Attribute::update]; }

    friend bool operator==(const Wfn&, const Wfn&) = default;

private:
    std::array<AttributeValue, kAttributeCount> values_{};
};

/// CPE 2.2 URI ("cpe:/...") to WFN. Throws MalformedUri.
Wfn unbind_uri(std::string_view uri);

/// CPE 2.3 formatted string ("cpe:2.3:...") to WFN. Throws MalformedFormattedString.
Wfn unbind_formatted_string(std::string_view fs);

/// Trailing ANY components are elided. The extended attributes are packed
/// into the edition component, with the language in the leading slot, only
/// when at least one of them is not ANY.
std::string bind_to_uri(const Wfn& wfn);

std::string bind_to_formatted_string(const Wfn& wfn);

/// Human-readable attribute listing:
/// "part:a, vendor:microsoft, ..., update:NA, edition:ANY, ...".
std::string to_wfn_text(const Wfn& wfn);

/// Inverse of to_wfn_text. Attributes may appear in any order; omitted
/// attributes are ANY. Throws InvalidWfn.
Wfn parse_wfn_text(std::string_view text);

/// Dispatches on the prefix: "cpe:2.3:" or "cpe:/". Throws MalformedUri or
/// MalformedFormattedString.
Wfn unbind_any(std::string_view name);

/// bind_to_uri(unbind_uri(uri)).
std::string canonical_uri(std::string_view uri);

} // namespace iva
