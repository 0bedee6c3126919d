#pragma once

// Fake-context generation: iterative constituency mask-and-fill over each
// sentence of a paragraph, and prefix completion.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contraforge/backend.hpp"
#include "contraforge/ptb.hpp"
#include "contraforge/random.hpp"
#include "contraforge/sentences.hpp"

namespace contraforge {

struct RewriteConfig {
  int k_iterations = 1;
  // Fill requests per chosen constituent before drawing another one.
  int max_retries = 5;
  // Constituents tried per iteration before the iteration is given up.
  int max_constituents = 3;
  int n_candidates = 3;
  std::string mask_token = std::string(kDefaultMaskToken);
  std::uint64_t seed = 0;
  bool exclude_whole_sentence = true;

  // Throws ContractError on k_iterations < 1, non-positive retry counts or an
  // empty mask token.
  void validate() const;
};

struct EditStep {
  int iteration = 0;  // 1-based
  CharSpan span;      // in the sentence as it was before this step
  std::string label;
  std::string original;
  std::string replacement;
  int retries_used = 0;

  bool operator==(const EditStep&) const = default;
};

struct EditTrace {
  std::size_t sentence_index = 0;
  std::vector<EditStep> steps;

  bool operator==(const EditTrace&) const = default;
};

OrderedJson to_json(const EditTrace& trace);
EditTrace trace_from_json(const Json& j);

// Applies the steps in order, checking that each step's original text is
// present at its span. Throws ContractError on mismatch.
std::string replay_trace(std::string_view sentence, const EditTrace& trace);

// Re-applies per-sentence traces to a paragraph.
std::string replay_paragraph(std::string_view paragraph, const std::vector<EditTrace>& traces);

struct MaskedSentence {
  std::string masked_sentence;
  ConstituentSpan chosen;
};

// Draws one eligible constituent uniformly and splices the mask token over
// it. nullopt when the sentence has nothing maskable.
std::optional<MaskedSentence> mask_constituent(std::string_view sentence, const ParseTree& tree,
                                               Rng& rng, const RewriteConfig& config);

struct SentenceRewrite {
  std::string sentence;
  EditTrace trace;
};

// Runs up to k_iterations parse -> mask -> fill rounds over
// sentences[index]. Each round re-parses the current text. Fill context is
// (sentences[0], sentences[index-1], masked, sentences[index+1]) with empty
// strings past the paragraph edges. Candidates equal to the masked text after
// case folding and whitespace collapsing are rejected. Backend failures
// propagate; a sentence where nothing could be changed comes back unchanged
// with an empty trace.
SentenceRewrite rewrite_sentence(const std::vector<std::string>& sentences, std::size_t index,
                                 Filler& filler, Parser& parser, const RewriteConfig& config,
                                 Rng& rng);

struct ParagraphRewrite {
  std::string fake_text;
  std::vector<EditTrace> traces;  // one per sentence, in order
};

// Rewrites every sentence in order. Earlier sentences are already rewritten
// when later ones are filled, so edits can stay consistent.
ParagraphRewrite rewrite_paragraph(std::string_view paragraph, Filler& filler, Parser& parser,
                                   const RewriteConfig& config, Rng& rng);

struct PrefixRewrite {
  std::string fake_text;
  std::size_t prefix_tokens = 0;
  std::vector<std::string> warnings;
};

// Keeps the first ceil(ratio * tokens) whitespace tokens as a prompt and
// appends the completer's continuation, capped at 1.5x the original token
// count.
PrefixRewrite prefix_completion_rewrite(std::string_view paragraph, Completer& completer,
                                        double prefix_ratio = 0.2, std::uint64_t seed = 0);

}  // namespace contraforge
