#include "contraforge/gcf.hpp"

#include <fstream>

#include "contraforge/error.hpp"
#include "contraforge/ptb.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

namespace {

// Index (1-based) of the whitespace token containing code point `cp`.
std::size_t token_at(const std::vector<text::Token>& tokens, std::size_t cp) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (cp < tokens[i].span.end) return i + 1;
  }
  return tokens.size();
}

}  // namespace

GcfArticleResult build_examples(const std::string& article_id,
                                const std::vector<std::string>& sentences, Parser& parser,
                                Rng& rng, const GcfConfig& config) {
  GcfArticleResult result;
  const std::size_t T = sentences.size();
  if (T < config.min_sentences || T < 3) {
    result.skipped_short_article = true;
    return result;
  }
  for (std::size_t t = 2; t + 1 <= T; ++t) {
    const std::string& st = sentences[t - 1];
    const auto tokens = text::whitespace_tokens(st);
    if (tokens.size() > config.max_sentence_tokens) {
      ++result.skipped_too_long;
      continue;
    }
    if (tokens.empty() || st.find(config.mask_token) != std::string::npos) {
      ++result.skipped_unmaskable;
      continue;
    }
    const ParseTree tree = parse_bracketed(parser.parse(st), st);
    const auto eligible = eligible_constituents(tree, st, config.exclude_whole_sentence);
    if (eligible.empty()) {
      ++result.skipped_unmaskable;
      continue;
    }
    const auto& chosen = eligible[uniform_index(rng, eligible.size())];

    GcfExample ex;
    ex.article_id = article_id;
    ex.t = t;
    ex.input.s1 = sentences[0];
    ex.input.s_prev = sentences[t - 2];
    ex.input.masked_st = splice(st, chosen.char_span, config.mask_token);
    ex.input.s_next = sentences[t];
    ex.target = chosen.text;
    ex.a = token_at(tokens, chosen.char_span.start);
    ex.b = token_at(tokens, chosen.char_span.end - 1);
    result.examples.push_back(std::move(ex));
  }
  return result;
}

std::string reconstruct_sentence(const GcfExample& example, std::string_view mask_token) {
  const auto pos = example.input.masked_st.find(mask_token);
  if (pos == std::string::npos) throw ContractError("masked sentence has no mask token");
  std::string out = example.input.masked_st;
  out.replace(pos, mask_token.size(), example.target);
  return out;
}

OrderedJson training_record(const GcfExample& ex, const GcfConfig& config) {
  const std::string sep = " " + config.separator + " ";
  OrderedJson j;
  j["input"] = ex.input.s1 + sep + ex.input.s_prev + sep + ex.input.masked_st + sep + ex.input.s_next;
  j["output"] = ex.target;
  j["article_id"] = ex.article_id;
  j["t"] = ex.t;
  j["a"] = ex.a;
  j["b"] = ex.b;
  return j;
}

GcfExample example_from_record(const Json& record, const GcfConfig& config) {
  const std::string sep = " " + config.separator + " ";
  const std::string input = record.at("input").get<std::string>();
  std::vector<std::string> parts;
  std::size_t from = 0;
  for (auto pos = input.find(sep); pos != std::string::npos; pos = input.find(sep, from)) {
    parts.push_back(input.substr(from, pos - from));
    from = pos + sep.size();
  }
  parts.push_back(input.substr(from));
  if (parts.size() != 4) {
    throw FormatError("GCF input must have 4 segments, found " + std::to_string(parts.size()), 0);
  }
  GcfExample ex;
  ex.input = {parts[0], parts[1], parts[2], parts[3]};
  ex.target = record.at("output").get<std::string>();
  ex.article_id = record.value("article_id", "");
  ex.t = record.value("t", std::size_t{0});
  ex.a = record.value("a", std::size_t{0});
  ex.b = record.value("b", std::size_t{0});
  return ex;
}

SerializeReport serialize_training(const std::vector<GcfExample>& examples, std::ostream& out,
                                   const GcfConfig& config,
                                   const std::optional<FileHeader>& header) {
  SerializeReport report;
  if (header) write_line(out, header_json(*header));
  for (const auto& ex : examples) {
    if (ex.target.find(config.mask_token) != std::string::npos) {
      report.rejected.push_back("article " + ex.article_id + " t=" + std::to_string(ex.t) +
                                ": target contains the mask token");
      continue;
    }
    write_line(out, training_record(ex, config));
    ++report.written;
  }
  return report;
}

SerializeReport serialize_training(const std::vector<GcfExample>& examples,
                                   const std::filesystem::path& path, const GcfConfig& config,
                                   const std::optional<FileHeader>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return serialize_training(examples, out, config, header);
}

std::vector<GcfExample> read_training(std::istream& in, const GcfConfig& config) {
  JsonlReader reader(in);
  std::vector<GcfExample> out;
  while (auto line = reader.next()) {
    if (parse_header(*line)) continue;
    out.push_back(example_from_record(*line, config));
  }
  return out;
}

}  // namespace contraforge
