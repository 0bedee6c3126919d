#pragma once

// Model capabilities behind the wire protocol: parse, fill, read, detect and
// complete. The pipeline talks to these interfaces only; implementations are
// either in-process baselines (baselines.hpp) or HTTP clients
// (http_backend.hpp).
//
// Wire format (JSON bodies, POST):
//   /parse    {"sentence"}                                    -> {"tree"}
//   /fill     {"first_sentence", "previous_sentence", "masked_sentence",
//              "next_sentence", "n_candidates", "mask_token",
//              optional hints "label", "original", "seed"}   -> {"candidates": [..]}
//   /read     {"question", "paragraph"}                       -> {"text", "start", "end", "span_score"}
//   /detect   {"paragraph", optional "provenance"}            -> {"trust"}
//   /complete {"prompt", "max_tokens", optional "seed"}       -> {"continuation"}
// Offsets are code points. Invalid requests get HTTP 422, capabilities a
// server does not provide get 501.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contraforge/jsonl.hpp"
#include "contraforge/squad.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

enum class Capability { parse, fill, read, detect, complete };

std::string_view to_string(Capability c);
Capability capability_from_string(std::string_view s);
// "/parse", "/fill", ...
std::string route_for(Capability c);

inline constexpr std::string_view kDefaultMaskToken = "[MASK]";

// Context handed to the span filler: the first sentence of the paragraph,
// its neighbours (empty at paragraph boundaries) and the current sentence
// with exactly one mask token.
struct FillRequest {
  std::string first_sentence;
  std::string previous_sentence;
  std::string masked_sentence;
  std::string next_sentence;

  bool operator==(const FillRequest&) const = default;
};

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Throws ContractError unless the masked sentence holds the mask exactly once.
void check_fill_request(const FillRequest& request, std::string_view mask_token);

// A fill request plus hints. `label` and `original` describe the masked
// constituent; model fillers ignore them, table-driven fillers need them.
struct FillCall {
  FillRequest request;
  std::string mask_token = std::string(kDefaultMaskToken);
  std::string label;
  std::string original;
  int n_candidates = 3;
  std::uint64_t seed = 0;
};

struct ScoredAnswer {
  std::string text;
  CharSpan char_span;
  double span_score = 0.0;
  double trust_score = 1.0;
  double fused_score = 0.0;
  std::size_t context_index = 0;
};

// Throws ContractError if the answer does not index the paragraph exactly or
// a score is outside [0, 1].
void check_answer(const ScoredAnswer& answer, std::string_view paragraph);

// What a detector may see of a context. Provenance is only filled in when
// the detector asks for it (attribution / oracle runs).
struct ContextView {
  std::string_view text;
  std::optional<Provenance> provenance;
};

class Parser {
 public:
  virtual ~Parser() = default;
  // Bracketed tree whose leaves align with the sentence.
  virtual std::string parse(std::string_view sentence) = 0;
};

class Filler {
 public:
  virtual ~Filler() = default;
  // Up to n_candidates replacement strings, none containing the mask token.
  // An empty result means no usable fill.
  virtual std::vector<std::string> fill(const FillCall& call) = 0;
};

class Reader {
 public:
  virtual ~Reader() = default;
  // Best span in the paragraph; only span_score is meaningful.
  virtual ScoredAnswer read(std::string_view question, std::string_view paragraph) = 0;
};

class Detector {
 public:
  virtual ~Detector() = default;
  // Trust that the paragraph is real, in [0, 1].
  virtual double trust(const ContextView& context) = 0;
  virtual bool needs_provenance() const { return false; }
};

class Completer {
 public:
  virtual ~Completer() = default;
  virtual std::string complete(std::string_view prompt, std::size_t max_tokens,
                               std::uint64_t seed) = 0;
};

// Wire encodings shared by the clients and the baseline server.
namespace wire {

OrderedJson parse_request(std::string_view sentence);
OrderedJson parse_response(std::string_view tree);

OrderedJson fill_request(const FillCall& call);
FillCall fill_call_from(const Json& j);
OrderedJson fill_response(const std::vector<std::string>& candidates);

OrderedJson read_request(std::string_view question, std::string_view paragraph);
OrderedJson read_response(const ScoredAnswer& answer);
ScoredAnswer answer_from(const Json& j);

OrderedJson detect_request(const ContextView& context);
OrderedJson detect_response(double trust);

OrderedJson complete_request(std::string_view prompt, std::size_t max_tokens, std::uint64_t seed);
OrderedJson complete_response(std::string_view continuation);

}  // namespace wire

}  // namespace contraforge
