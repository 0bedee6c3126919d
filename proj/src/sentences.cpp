#include "contraforge/sentences.hpp"

#include <array>
#include <cctype>

#include "contraforge/error.hpp"

namespace contraforge {

namespace {

constexpr std::array<std::string_view, 38> kAbbreviations = {
    "mr",  "mrs", "ms",   "dr",  "prof", "sr",   "jr",   "st",  "mt",   "vs",
    "etc", "e.g", "i.e",  "u.s", "inc",  "ltd",  "co",   "corp", "no",  "gen",
    "col", "lt",  "sgt",  "capt", "rev", "fig",  "jan",  "feb", "mar",  "apr",
    "jun", "jul", "aug",  "sep", "sept", "oct",  "nov",  "dec"};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

// Multi-byte closing quotes ” and ’ (E2 80 9D / E2 80 99).
std::size_t closer_length(std::string_view s, std::size_t i) {
  if (is_closer(s[i])) return 1;
  if (s.substr(i).starts_with("\xE2\x80\x9D") || s.substr(i).starts_with("\xE2\x80\x99")) return 3;
  return 0;
}

bool starts_new_sentence(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c >= 0x80) return true;
  return std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(' || c == '[';
}

bool is_abbreviation(std::string_view word) {
  while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.front()))) {
    word.remove_prefix(1);
  }
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto a : kAbbreviations) {
    if (a == lower) return true;
  }
  return false;
}

}  // namespace

std::vector<Sentence> sentence_split(std::string_view p) {
  std::vector<Sentence> out;
  // Byte offsets first; code points are computed when a sentence is emitted.
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < p.size() && text::is_space(p[i])) ++i;
  };
  auto emit = [&](std::size_t b, std::size_t e) {
    const std::size_t start_cp = text::length(p.substr(0, b));
    const std::string_view body = p.substr(b, e - b);
    out.push_back({std::string(body), {start_cp, start_cp + text::length(body)}});
  };

  skip_space();
  std::size_t start = i;
  while (i < p.size()) {
    if (!is_terminator(p[i])) {
      ++i;
      continue;
    }
    const std::size_t term_begin = i;
    while (i < p.size() && is_terminator(p[i])) ++i;
    const bool single_period = (i - term_begin == 1) && p[term_begin] == '.';
    while (i < p.size()) {
      const std::size_t n = closer_length(p, i);
      if (n == 0) break;
      i += n;
    }
    const std::size_t end = i;
    if (end < p.size() && !text::is_space(p[end])) continue;

    std::size_t next = end;
    while (next < p.size() && text::is_space(p[next])) ++next;
    if (next < p.size() && !starts_new_sentence(p, next)) continue;
    if (single_period) {
      std::size_t w = term_begin;
      while (w > start && !text::is_space(p[w - 1])) --w;
      if (is_abbreviation(p.substr(w, term_begin - w))) continue;
    }
    emit(start, end);
    i = next;
    start = i;
  }
  if (start < p.size()) {
    std::size_t e = p.size();
    while (e > start && text::is_space(p[e - 1])) --e;
    if (e > start) emit(start, e);
  }
  return out;
}

std::string rejoin_sentences(std::string_view paragraph, const std::vector<Sentence>& sentences,
                             const std::vector<std::string>& replacements) {
  if (sentences.size() != replacements.size()) {
    throw ContractError("rejoin_sentences: sentence/replacement count mismatch");
  }
  std::string out;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    const auto& span = sentences[k].span;
    out += text::substr(paragraph, {cursor, span.start});
    out += replacements[k];
    cursor = span.end;
  }
  out += text::substr(paragraph, {cursor, text::length(paragraph)});
  return out;
}

}  // namespace contraforge
