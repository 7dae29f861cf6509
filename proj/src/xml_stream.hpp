#pragma once

// Thin SAX layer over expat. Element names are reported without their
// namespace prefix ("vuln:summary" -> "summary").

#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iva::xml {

using Attributes = std::vector<std::pair<std::string_view, std::string_view>>;

struct Callbacks {
    std::function<void(std::string_view name, const Attributes& attrs)> on_start;
    std::function<void(std::string_view name)> on_end;
    std::function<void(std::string_view text)> on_text;
};

std::string_view attribute(const Attributes& attrs, std::string_view name);

/// Throws StreamError / DocumentError (declared in iva/feed_parser.hpp).
void parse(std::istream& in, const Callbacks& callbacks);

} // namespace iva::xml
