#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "contraforge/text.hpp"

namespace contraforge {

struct Sentence {
  std::string text;
  CharSpan span;  // code points into the paragraph
};

// Rule-based splitter. Sentence spans are ordered and the gaps between them
// contain only whitespace, so the paragraph is recovered by re-inserting the
// gaps. Common abbreviations ("Dr.", "e.g.") do not end a sentence. A
// paragraph with no boundary is returned as one sentence; a blank one yields
// no sentences.
std::vector<Sentence> sentence_split(std::string_view paragraph);

// Replaces each sentence span of `paragraph` with the matching entry of
// `replacements`, keeping the inter-sentence whitespace.
std::string rejoin_sentences(std::string_view paragraph, const std::vector<Sentence>& sentences,
                             const std::vector<std::string>& replacements);

}  // namespace contraforge
