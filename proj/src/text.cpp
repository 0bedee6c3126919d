#include "contraforge/text.hpp"

#include <algorithm>
#include <cctype>

#include "contraforge/error.hpp"

namespace contraforge::text {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Length in bytes of the code point starting at s[i]. Malformed sequences
// are consumed one byte at a time.
std::size_t sequence_length(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t n = 1;
  if (lead >= 0xF0 && lead < 0xF8) {
    n = 4;
  } else if (lead >= 0xE0) {
    n = lead < 0xF0 ? 3 : 1;
  } else if (lead >= 0xC0) {
    n = 2;
  }
  if (i + n > s.size()) return 1;
  for (std::size_t k = 1; k < n; ++k) {
    if (!is_continuation(static_cast<unsigned char>(s[i + k]))) return 1;
  }
  return n;
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

template <typename Pred>
std::vector<Token> split_runs(std::string_view s, Pred in_token, bool punct_single) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t cp = 0;
  while (i < s.size()) {
    if (punct_single && is_ascii_punct(s[i])) {
      out.push_back({std::string(1, s[i]), {cp, cp + 1}});
      ++i;
      ++cp;
      continue;
    }
    if (!in_token(s[i])) {
      i += sequence_length(s, i);
      ++cp;
      continue;
    }
    const std::size_t begin = i;
    const std::size_t begin_cp = cp;
    while (i < s.size() && in_token(s[i]) && !(punct_single && is_ascii_punct(s[i]))) {
      i += sequence_length(s, i);
      ++cp;
    }
    out.push_back({std::string(s.substr(begin, i - begin)), {begin_cp, cp}});
  }
  return out;
}

}  // namespace

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); i += sequence_length(s, i)) ++n;
  return n;
}

std::size_t byte_offset(std::string_view s, std::size_t cp) {
  std::size_t i = 0;
  for (std::size_t k = 0; k < cp; ++k) {
    if (i >= s.size()) {
      throw ContractError("code point offset " + std::to_string(cp) +
                          " is past the end of a string of length " +
                          std::to_string(length(s)));
    }
    i += sequence_length(s, i);
  }
  return i;
}

std::string substr(std::string_view s, CharSpan span) {
  if (span.start > span.end) throw ContractError("inverted span");
  const std::size_t b = byte_offset(s, span.start);
  const std::size_t e = b + byte_offset(s.substr(b), span.end - span.start);
  return std::string(s.substr(b, e - b));
}

std::u32string to_u32(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const std::size_t n = sequence_length(s, i);
    const auto lead = static_cast<unsigned char>(s[i]);
    char32_t c = 0;
    if (n == 1) {
      c = lead;
    } else {
      c = lead & (0xFF >> (n + 1));
      for (std::size_t k = 1; k < n; ++k) {
        c = (c << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
      }
    }
    out.push_back(c);
    i += n;
  }
  return out;
}

std::string to_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  });
  return out;
}

std::vector<Token> whitespace_tokens(std::string_view s) {
  return split_runs(s, [](char c) { return !is_space(c); }, false);
}

std::vector<Token> word_punct_tokens(std::string_view s) {
  return split_runs(s, [](char c) { return !is_space(c); }, true);
}

std::vector<Token> word_tokens(std::string_view s) {
  return split_runs(s, is_word_byte, false);
}

}  // namespace contraforge::text
