#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Thin wrappers over ICU for the handful of Unicode queries the text
// pipeline needs. Strings are UTF-8 throughout.
namespace bhs::unicode {

enum class CharClass {
  kLetter,
  kMark,
  kNumber,
  kPunctuation,
  kSymbol,
  kSeparator,
  kControl,
  kFormat,
  kOther,
};

bool is_valid_utf8(std::string_view text);

/// NFC normalization. Invalid sequences are replaced with U+FFFD.
std::string normalize_nfc(std::string_view text);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

CharClass char_class(char32_t cp);
bool is_whitespace(char32_t cp);

/// Pictographic emoji, emoji-presentation characters, regional indicators
/// and skin-tone modifiers. Plain digits and '#'/'*' are not emoji here.
bool is_emoji(char32_t cp);

/// Extended grapheme clusters.
std::vector<std::string> graphemes(std::string_view text);
std::size_t grapheme_count(std::string_view text);

/// Strips Unicode whitespace from both ends.
std::string_view trim(std::string_view text);

/// Splits on runs of Unicode whitespace; never yields empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace bhs::unicode
