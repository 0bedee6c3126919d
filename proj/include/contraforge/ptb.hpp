#pragma once

// Penn-Treebank bracketed constituency trees aligned to their source sentence.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contraforge/text.hpp"

namespace contraforge {

// A node is either a leaf (part-of-speech label + token) or an interior
// constituent with children. Leaf tokens keep their escaped treebank form
// ("-LRB-", "``"); char_span always refers to the surface text in the
// source sentence, in code points.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;
  std::optional<std::string> token;
  CharSpan char_span;

  bool is_leaf() const { return token.has_value(); }
  bool operator==(const ParseTree&) const = default;
};

struct ConstituentSpan {
  std::string label;
  CharSpan char_span;
  std::string text;

  bool operator==(const ConstituentSpan&) const = default;
};

// Constituent types that may be masked.
const std::vector<std::string>& eligible_labels();
bool is_eligible_label(std::string_view label);

// Strips treebank function tags and indices: "NP-SBJ-1" -> "NP".
// Labels that begin with '-' ("-NONE-") are returned unchanged.
std::string base_label(std::string_view label);

// Surface forms a treebank leaf token may take in raw text, most specific
// first. "-LRB-" -> {"-LRB-", "(", "[", "{"}.
std::vector<std::string> surface_forms(std::string_view token);

// Parses a bracketed tree and aligns its leaves left to right against the
// sentence, skipping whitespace. Leaves labelled -NONE- (empty elements) get
// zero-width spans. Throws ParseError for malformed brackets and
// AlignmentError when a leaf does not match the sentence.
ParseTree parse_bracketed(std::string_view tree_string, std::string_view sentence);

// Canonical single-space form: "(S (NP (DT the) (NN game)) (. .))".
std::string serialize(const ParseTree& tree);

// Whitespace-normalized form of any bracketed string, computed lexically
// without building a tree.
std::string canonical_bracketing(std::string_view tree_string);

// Interior nodes whose base label is eligible, in pre-order (outer before
// inner, left to right). Zero-width nodes are skipped; with exclude_root the
// nodes spanning the whole tree are omitted.
std::vector<ConstituentSpan> eligible_constituents(const ParseTree& tree, std::string_view sentence,
                                                   bool exclude_root);

// prefix + replacement + suffix, with the span in code points.
std::string splice(std::string_view sentence, CharSpan span, std::string_view replacement);

}  // namespace contraforge
