#include "contraforge/rewrite.hpp"

#include <cmath>

#include "contraforge/baselines.hpp"
#include "contraforge/error.hpp"

namespace contraforge {

void RewriteConfig::validate() const {
  if (k_iterations < 1) throw ContractError("K must be >= 1");
  if (max_retries < 1) throw ContractError("max_retries must be >= 1");
  if (max_constituents < 1) throw ContractError("max_constituents must be >= 1");
  if (n_candidates < 1) throw ContractError("n_candidates must be >= 1");
  if (mask_token.empty()) throw ContractError("mask token must be non-empty");
}

OrderedJson to_json(const EditTrace& trace) {
  OrderedJson steps = OrderedJson::array();
  for (const auto& s : trace.steps) {
    OrderedJson j;
    j["iteration"] = s.iteration;
    j["span"] = {s.span.start, s.span.end};
    j["label"] = s.label;
    j["original"] = s.original;
    j["replacement"] = s.replacement;
    j["retries_used"] = s.retries_used;
    steps.push_back(std::move(j));
  }
  OrderedJson out;
  out["sentence_index"] = trace.sentence_index;
  out["steps"] = std::move(steps);
  return out;
}

EditTrace trace_from_json(const Json& j) {
  EditTrace t;
  t.sentence_index = j.at("sentence_index").get<std::size_t>();
  for (const auto& s : j.at("steps")) {
    EditStep step;
    step.iteration = s.at("iteration").get<int>();
    step.span = {s.at("span").at(0).get<std::size_t>(), s.at("span").at(1).get<std::size_t>()};
    step.label = s.at("label").get<std::string>();
    step.original = s.at("original").get<std::string>();
    step.replacement = s.at("replacement").get<std::string>();
    step.retries_used = s.value("retries_used", 0);
    t.steps.push_back(std::move(step));
  }
  return t;
}

std::string replay_trace(std::string_view sentence, const EditTrace& trace) {
  std::string current(sentence);
  for (const auto& step : trace.steps) {
    if (text::substr(current, step.span) != step.original) {
      throw ContractError("trace step " + std::to_string(step.iteration) +
                          " does not match the sentence at its span");
    }
    current = splice(current, step.span, step.replacement);
  }
  return current;
}

std::string replay_paragraph(std::string_view paragraph, const std::vector<EditTrace>& traces) {
  const auto sentences = sentence_split(paragraph);
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  for (const auto& trace : traces) {
    if (trace.sentence_index >= texts.size()) {
      throw ContractError("trace refers to sentence " + std::to_string(trace.sentence_index) +
                          " of a " + std::to_string(texts.size()) + "-sentence paragraph");
    }
    texts[trace.sentence_index] = replay_trace(texts[trace.sentence_index], trace);
  }
  if (sentences.empty()) return std::string(paragraph);
  return rejoin_sentences(paragraph, sentences, texts);
}

std::optional<MaskedSentence> mask_constituent(std::string_view sentence, const ParseTree& tree,
                                               Rng& rng, const RewriteConfig& config) {
  const auto eligible = eligible_constituents(tree, sentence, config.exclude_whole_sentence);
  if (eligible.empty()) return std::nullopt;
  const auto& chosen = eligible[uniform_index(rng, eligible.size())];
  return MaskedSentence{splice(sentence, chosen.char_span, config.mask_token), chosen};
}

namespace {

std::optional<std::string> first_usable(const std::vector<std::string>& candidates,
                                        std::string_view original, std::string_view mask_token) {
  const std::string key = echo_key(original);
  for (const auto& c : candidates) {
    if (text::trim(c).empty()) continue;
    if (c.find(mask_token) != std::string::npos) continue;
    if (echo_key(c) == key) continue;
    return c;
  }
  return std::nullopt;
}

}  // namespace

SentenceRewrite rewrite_sentence(const std::vector<std::string>& sentences, std::size_t index,
                                 Filler& filler, Parser& parser, const RewriteConfig& config,
                                 Rng& rng) {
  config.validate();
  if (index >= sentences.size()) {
    throw ContractError("sentence index " + std::to_string(index) + " out of range");
  }
  SentenceRewrite out{sentences[index], {index, {}}};
  std::string& current = out.sentence;

  for (int iteration = 1; iteration <= config.k_iterations; ++iteration) {
    if (text::trim(current).empty()) break;
    const ParseTree tree = parse_bracketed(parser.parse(current), current);
    const auto eligible = eligible_constituents(tree, current, config.exclude_whole_sentence);
    if (eligible.empty()) break;

    std::vector<std::size_t> untried(eligible.size());
    for (std::size_t i = 0; i < untried.size(); ++i) untried[i] = i;

    std::optional<EditStep> accepted;
    for (int attempt = 0; attempt < config.max_constituents && !untried.empty() && !accepted;
         ++attempt) {
      const std::size_t pick = uniform_index(rng, untried.size());
      const ConstituentSpan& chosen = eligible[untried[pick]];
      untried.erase(untried.begin() + static_cast<std::ptrdiff_t>(pick));

      FillCall call;
      call.request.masked_sentence = splice(current, chosen.char_span, config.mask_token);
      if (count_occurrences(call.request.masked_sentence, config.mask_token) != 1) continue;
      // The first sentence is global context; when it is the one being
      // rewritten it would reveal the masked text, so it is left out.
      call.request.first_sentence = index == 0 ? std::string() : sentences[0];
      call.request.previous_sentence = index == 0 ? std::string() : sentences[index - 1];
      call.request.next_sentence = index + 1 < sentences.size() ? sentences[index + 1] : std::string();
      call.mask_token = config.mask_token;
      call.label = chosen.label;
      call.original = chosen.text;
      call.n_candidates = config.n_candidates;

      for (int retry = 0; retry < config.max_retries; ++retry) {
        call.seed = rng();
        const auto replacement = first_usable(filler.fill(call), chosen.text, config.mask_token);
        if (!replacement) continue;
        accepted = EditStep{iteration, chosen.char_span, chosen.label, chosen.text, *replacement, retry};
        break;
      }
    }
    if (!accepted) continue;
    current = splice(current, accepted->span, accepted->replacement);
    out.trace.steps.push_back(std::move(*accepted));
  }
  return out;
}

ParagraphRewrite rewrite_paragraph(std::string_view paragraph, Filler& filler, Parser& parser,
                                   const RewriteConfig& config, Rng& rng) {
  config.validate();
  const auto sentences = sentence_split(paragraph);
  ParagraphRewrite out;
  if (sentences.empty()) {
    out.fake_text = std::string(paragraph);
    return out;
  }
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto r = rewrite_sentence(texts, i, filler, parser, config, rng);
    texts[i] = std::move(r.sentence);
    out.traces.push_back(std::move(r.trace));
  }
  out.fake_text = rejoin_sentences(paragraph, sentences, texts);
  return out;
}

PrefixRewrite prefix_completion_rewrite(std::string_view paragraph, Completer& completer,
                                        double prefix_ratio, std::uint64_t seed) {
  if (!(prefix_ratio > 0.0 && prefix_ratio < 1.0)) {
    throw ContractError("prefix ratio must be in (0, 1)");
  }
  PrefixRewrite out;
  const auto tokens = text::whitespace_tokens(paragraph);
  if (tokens.empty()) {
    out.fake_text = std::string(paragraph);
    out.warnings.push_back("empty paragraph");
    return out;
  }
  const std::size_t count = tokens.size();
  // The epsilon keeps products such as 0.2 * 15 from rounding up.
  std::size_t n = static_cast<std::size_t>(std::ceil(prefix_ratio * static_cast<double>(count) - 1e-9));
  n = std::clamp<std::size_t>(n, 1, count);
  out.prefix_tokens = n;
  out.fake_text = text::substr(paragraph, {tokens.front().span.start, tokens[n - 1].span.end});

  const auto cap = static_cast<std::size_t>(std::floor(1.5 * static_cast<double>(count)));
  const std::size_t budget = cap > n ? cap - n : 0;
  const std::string continuation = completer.complete(out.fake_text, budget, seed);
  const auto cont_tokens = text::whitespace_tokens(continuation);
  if (cont_tokens.empty() || budget == 0) {
    out.warnings.push_back("empty completion; fake is the prompt only");
  } else {
    const std::size_t keep = std::min(budget, cont_tokens.size());
    const std::string kept =
        text::substr(continuation, {0, cont_tokens[keep - 1].span.end});
    if (!text::is_space(kept.front())) out.fake_text.push_back(' ');
    out.fake_text += kept;
  }
  if (text::collapse_whitespace(out.fake_text) == text::collapse_whitespace(paragraph)) {
    out.warnings.push_back("zero-edit: completion reproduces the original paragraph");
  }
  return out;
}

}  // namespace contraforge
