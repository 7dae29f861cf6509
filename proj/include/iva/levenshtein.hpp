#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace iva {

/// Edit distance with unit cost for insertion, deletion and substitution.
/// Operates on bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Distance if it is at most `max_distance`, otherwise nullopt. Runs in
/// O(max_distance * min(|a|, |b|)).
std::optional<std::size_t> levenshtein_within(std::string_view a, std::string_view b,
                                              std::size_t max_distance);

} // namespace iva
