#include "iva/levenshtein.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace iva {

std::size_t levenshtein(std::string_view a, std::string_view b)
{
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
            diag = up;
        }
    }
    return row[b.size()];
}

std::optional<std::size_t> levenshtein_within(std::string_view a, std::string_view b,
                                              std::size_t max_distance)
{
    if (a.size() < b.size()) std::swap(a, b);
    if (a.size() - b.size() > max_distance) return std::nullopt;
    if (b.empty()) return a.size();

    // Banded DP: only cells with |i - j| <= max_distance can stay within bound.
    constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 2;
    std::vector<std::size_t> prev(b.size() + 1, kInf);
    std::vector<std::size_t> cur(b.size() + 1, kInf);
    for (std::size_t j = 0; j <= std::min(b.size(), max_distance); ++j) prev[j] = j;

    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t lo = i > max_distance ? i - max_distance : 1;
        std::size_t hi = std::min(b.size(), i + max_distance);
        std::fill(cur.begin(), cur.end(), kInf);
        if (i <= max_distance) cur[0] = i;
        std::size_t row_min = cur[0];
        for (std::size_t j = lo; j <= hi; ++j) {
            std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
            row_min = std::min(row_min, cur[j]);
        }
        if (row_min > max_distance) return std::nullopt;
        std::swap(prev, cur);
    }
    if (prev[b.size()] > max_distance) return std::nullopt;
    return prev[b.size()];
}

} // namespace iva
