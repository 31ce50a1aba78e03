#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kgdial {

/// UAX-29 word segments that contain letters, digits, kana or ideographs.
/// Whitespace and punctuation segments are dropped. Case is preserved.
std::vector<std::string> word_tokens(std::string_view utf8);
std::size_t word_count(std::string_view utf8);

/// Extended grapheme clusters.
std::size_t grapheme_count(std::string_view utf8);
std::string truncate_graphemes(std::string_view utf8, std::size_t limit);

std::string to_lower(std::string_view utf8);

std::string trim(std::string_view s);

} // namespace kgdial
