#include "xml_stream.hpp"

#include "iva/feed_parser.hpp"

#include <expat.h>

#include <array>
#include <exception>
#include <memory>

namespace iva::xml {

namespace {

std::string_view local_name(const XML_Char* name)
{
    std::string_view n(name);
    auto colon = n.rfind(':');
    return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

struct State {
    const Callbacks* callbacks;
    std::exception_ptr error;
    XML_Parser parser;
};

void XMLCALL start_element(void* user, const XML_Char* name, const XML_Char** atts)
{
    auto* st = static_cast<State*>(user);
    if (!st->callbacks->on_start) return;
    try {
        Attributes attrs;
        for (std::size_t i = 0; atts[i] != nullptr; i += 2) {
            attrs.emplace_back(local_name(atts[i]), std::string_view(atts[i + 1]));
        }
        st->callbacks->on_start(local_name(name), attrs);
    } catch (...) {
        st->error = std::current_exception();
        XML_StopParser(st->parser, XML_FALSE);
    }
}

void XMLCALL end_element(void* user, const XML_Char* name)
{
    auto* st = static_cast<State*>(user);
    if (!st->callbacks->on_end) return;
    try {
        st->callbacks->on_end(local_name(name));
    } catch (...) {
        st->error = std::current_exception();
        XML_StopParser(st->parser, XML_FALSE);
    }
}

void XMLCALL character_data(void* user, const XML_Char* s, int len)
{
    auto* st = static_cast<State*>(user);
    if (!st->callbacks->on_text) return;
    try {
        st->callbacks->on_text(std::string_view(s, static_cast<std::size_t>(len)));
    } catch (...) {
        st->error = std::current_exception();
        XML_StopParser(st->parser, XML_FALSE);
    }
}

struct ParserDeleter {
    void operator()(XML_ParserStruct* p) const { XML_ParserFree(p); }
};

} // namespace

std::string_view attribute(const Attributes& attrs, std::string_view name)
{
    for (const auto& [k, v] : attrs) {
        if (k == name) return v;
    }
    return {};
}

void parse(std::istream& in, const Callbacks& callbacks)
{
    if (!in) throw StreamError("input stream is not readable");
    std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreate(nullptr));
    if (!parser) throw StreamError("cannot allocate XML parser");

    State state{&callbacks, nullptr, parser.get()};
    XML_SetUserData(parser.get(), &state);
    XML_SetElementHandler(parser.get(), start_element, end_element);
    XML_SetCharacterDataHandler(parser.get(), character_data);

    std::array<char, 64 * 1024> buffer{};
    bool any_input = false;
    while (true) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        auto got = in.gcount();
        if (in.bad()) throw StreamError("read error on input stream");
        bool last = in.eof() || got == 0;
        any_input = any_input || got > 0;
        if (XML_Parse(parser.get(), buffer.data(), static_cast<int>(got), last ? 1 : 0) ==
            XML_STATUS_ERROR) {
            if (state.error) std::rethrow_exception(state.error);
            throw DocumentError(std::string("XML error at line ") +
                                std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " +
                                XML_ErrorString(XML_GetErrorCode(parser.get())));
        }
        if (state.error) std::rethrow_exception(state.error);
        if (last) break;
    }
    if (!any_input) throw DocumentError("empty document");
}

} // namespace iva::xml
