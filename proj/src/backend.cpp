#include "contraforge/backend.hpp"

#include "contraforge/error.hpp"

namespace contraforge {

std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::parse:
      return "parse";
    case Capability::fill:
      return "fill";
    case Capability::read:
      return "read";
    case Capability::detect:
      return "detect";
    case Capability::complete:
      return "complete";
  }
  return "unknown";
}

Capability capability_from_string(std::string_view s) {
  for (auto c : {Capability::parse, Capability::fill, Capability::read, Capability::detect,
                 Capability::complete}) {
    if (to_string(c) == s) return c;
  }
  throw ContractError("unknown capability '" + std::string(s) + "'");
}

std::string route_for(Capability c) { return "/" + std::string(to_string(c)); }

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void check_fill_request(const FillRequest& request, std::string_view mask_token) {
  if (mask_token.empty()) throw ContractError("mask token is empty");
  const auto n = count_occurrences(request.masked_sentence, mask_token);
  if (n != 1) {
    throw ContractError("masked sentence must contain the mask token exactly once, found " +
                        std::to_string(n));
  }
}

void check_answer(const ScoredAnswer& answer, std::string_view paragraph) {
  const std::size_t n = text::length(paragraph);
  if (answer.char_span.start > answer.char_span.end || answer.char_span.end > n) {
    throw ContractError("answer span [" + std::to_string(answer.char_span.start) + ", " +
                        std::to_string(answer.char_span.end) + ") is outside the paragraph");
  }
  if (text::substr(paragraph, answer.char_span) != answer.text) {
    throw ContractError("answer text '" + answer.text + "' does not match paragraph[span]");
  }
  for (double s : {answer.span_score, answer.trust_score, answer.fused_score}) {
    if (!(s >= 0.0 && s <= 1.0)) throw ContractError("answer score outside [0, 1]");
  }
}

namespace wire {

OrderedJson parse_request(std::string_view sentence) {
  return OrderedJson{{"sentence", sentence}};
}

OrderedJson parse_response(std::string_view tree) { return OrderedJson{{"tree", tree}}; }

OrderedJson fill_request(const FillCall& call) {
  OrderedJson j;
  j["first_sentence"] = call.request.first_sentence;
  j["previous_sentence"] = call.request.previous_sentence;
  j["masked_sentence"] = call.request.masked_sentence;
  j["next_sentence"] = call.request.next_sentence;
  j["n_candidates"] = call.n_candidates;
  j["mask_token"] = call.mask_token;
  j["label"] = call.label;
  j["original"] = call.original;
  j["seed"] = call.seed;
  return j;
}

FillCall fill_call_from(const Json& j) {
  FillCall call;
  call.request.first_sentence = j.value("first_sentence", "");
  call.request.previous_sentence = j.value("previous_sentence", "");
  call.request.masked_sentence = j.at("masked_sentence").get<std::string>();
  call.request.next_sentence = j.value("next_sentence", "");
  call.n_candidates = j.value("n_candidates", 3);
  call.mask_token = j.value("mask_token", std::string(kDefaultMaskToken));
  call.label = j.value("label", "");
  call.original = j.value("original", "");
  call.seed = j.value("seed", std::uint64_t{0});
  if (call.n_candidates < 1) throw ContractError("n_candidates must be >= 1");
  check_fill_request(call.request, call.mask_token);
  return call;
}

OrderedJson fill_response(const std::vector<std::string>& candidates) {
  return OrderedJson{{"candidates", candidates}};
}

OrderedJson read_request(std::string_view question, std::string_view paragraph) {
  return OrderedJson{{"question", question}, {"paragraph", paragraph}};
}

OrderedJson read_response(const ScoredAnswer& a) {
  OrderedJson j;
  j["text"] = a.text;
  j["start"] = a.char_span.start;
  j["end"] = a.char_span.end;
  j["span_score"] = a.span_score;
  return j;
}

ScoredAnswer answer_from(const Json& j) {
  ScoredAnswer a;
  a.text = j.at("text").get<std::string>();
  a.char_span = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
  a.span_score = j.at("span_score").get<double>();
  return a;
}

OrderedJson detect_request(const ContextView& context) {
  OrderedJson j{{"paragraph", context.text}};
  if (context.provenance) j["provenance"] = to_string(context.provenance->kind);
  return j;
}

OrderedJson detect_response(double trust) { return OrderedJson{{"trust", trust}}; }

OrderedJson complete_request(std::string_view prompt, std::size_t max_tokens, std::uint64_t seed) {
  return OrderedJson{{"prompt", prompt}, {"max_tokens", max_tokens}, {"seed", seed}};
}

OrderedJson complete_response(std::string_view continuation) {
  return OrderedJson{{"continuation", continuation}};
}

}  // namespace wire

}  // namespace contraforge
