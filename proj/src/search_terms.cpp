#include "iva/search_terms.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace iva {

namespace {

std::vector<std::string> tokenize(const std::string& raw)
{
    std::istringstream in(raw);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) {
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        tokens.push_back(tok);
    }
    return tokens;
}

std::string join(const std::vector<std::string>& tokens, std::size_t n)
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out.push_back('_');
        out += tokens[i];
    }
    return out;
}

class TermList {
public:
    void add(std::string term)
    {
        if (!term.empty() && seen_.insert(term).second) terms_.push_back(std::move(term));
    }
    bool contains(const std::string& term) const { return seen_.contains(term); }
    std::vector<std::string> take() { return std::move(terms_); }

private:
    std::vector<std::string> terms_;
    std::set<std::string> seen_;
};

void add_leading_runs(TermList& out, const std::vector<std::string>& tokens, std::size_t min_len)
{
    for (std::size_t n = tokens.size(); n >= std::max<std::size_t>(min_len, 1); --n) {
        out.add(join(tokens, n));
    }
}

void add_single_tokens(TermList& out, const std::vector<std::string>& tokens)
{
    std::vector<std::string> words;
    std::vector<std::string> versions;
    for (const auto& t : tokens) {
        if (out.contains(t)) continue;
        (is_version_like(t) || std::isdigit(static_cast<unsigned char>(t[0])) ? versions : words)
            .push_back(t);
    }
    std::stable_sort(words.begin(), words.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    for (auto& w : words) out.add(std::move(w));
    for (auto& v : versions) out.add(std::move(v));
}

} // namespace

bool is_version_like(const std::string& term)
{
    if (term.empty() || !std::isdigit(static_cast<unsigned char>(term[0]))) return false;
    return std::all_of(term.begin(), term.end(), [](unsigned char c) {
        return std::isdigit(c) || c == '.';
    });
}

SearchTerms generate_search_terms(const InventoryProduct& product)
{
    auto product_tokens = tokenize(product.product_raw);
    if (product_tokens.empty()) throw EmptyProduct("inventory product name is blank");
    auto vendor_tokens = tokenize(product.vendor_raw);

    SearchTerms terms;
    if (!vendor_tokens.empty()) {
        TermList v;
        add_leading_runs(v, vendor_tokens, 1);
        add_single_tokens(v, vendor_tokens);
        terms.vendor_terms = v.take();
    }

    TermList p;
    add_leading_runs(p, product_tokens, 1);

    std::set<std::string> vendor_set(vendor_tokens.begin(), vendor_tokens.end());
    std::vector<std::string> without_vendor;
    for (const auto& t : product_tokens) {
        if (!vendor_set.contains(t)) without_vendor.push_back(t);
    }
    if (without_vendor.size() != product_tokens.size()) add_leading_runs(p, without_vendor, 2);

    add_single_tokens(p, product_tokens);
    terms.product_terms = p.take();
    return terms;
}

} // namespace iva
