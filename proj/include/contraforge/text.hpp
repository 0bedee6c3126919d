#pragma once

// Text utilities shared by every module. All public offsets in the library
// count Unicode code points, not bytes, so they agree with offsets produced by
// backends written in other languages. Strings are stored as UTF-8.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace contraforge {

// Half-open [start, end) range of code points.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start == end; }
  auto operator<=>(const CharSpan&) const = default;
};

namespace text {

bool is_space(char c);

// Number of code points in a UTF-8 string. Invalid bytes count as one each.
std::size_t length(std::string_view s);

// Byte offset of code point `cp`; `cp == length(s)` maps to s.size().
// Throws ContractError when cp is past the end.
std::size_t byte_offset(std::string_view s, std::size_t cp);

// Code-point based substring.
std::string substr(std::string_view s, CharSpan span);

std::u32string to_u32(std::string_view s);
std::string to_utf8(std::u32string_view s);

std::string trim(std::string_view s);
// Runs of whitespace become one space; leading/trailing whitespace removed.
std::string collapse_whitespace(std::string_view s);
// ASCII lowercase; non-ASCII bytes pass through.
std::string ascii_lower(std::string_view s);

struct Token {
  std::string text;
  CharSpan span;
};

// Maximal runs of non-whitespace.
std::vector<Token> whitespace_tokens(std::string_view s);

// Whitespace tokens with ASCII punctuation split off as single-character
// tokens. Used for edit diffing.
std::vector<Token> word_punct_tokens(std::string_view s);

// Maximal runs of alphanumeric characters (any non-ASCII byte counts as a word
// character). Punctuation and whitespace are separators.
std::vector<Token> word_tokens(std::string_view s);

}  // namespace text
}  // namespace contraforge
