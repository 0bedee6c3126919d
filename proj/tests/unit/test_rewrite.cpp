#include <map>

#include "contraforge/baselines.hpp"
#include "contraforge/error.hpp"
#include "contraforge/ptb.hpp"
#include "contraforge/rewrite.hpp"
#include "contraforge/sentences.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace contraforge;
using contraforge::testing::ScriptedFiller;

namespace {

const std::string kFig2 =
    "The game was played on February 7, 2016 at Levi's Stadium in the San Francisco Bay Area at "
    "Santa Clara, California.";
const std::string kFig2Tree =
    "(S (NP (DT The) (NN game)) (VP (VBD was) (VP (VBN played) (PP (IN on) (NP (NNP February) "
    "(CD 7) (, ,) (CD 2016))) (PP (IN at) (NP (NP (NNP Levi) (POS 's)) (NNP Stadium))) (PP (IN "
    "in) (NP (NP (DT the) (NNP San) (NNP Francisco) (NNP Bay) (NNP Area)) (PP (IN at) (NP (NNP "
    "Santa) (NNP Clara) (, ,) (NNP California))))))) (. .))";

class EchoFiller final : public Filler {
 public:
  std::vector<std::string> fill(const FillCall& call) override {
    ++calls;
    return {call.original, " " + text::ascii_lower(call.original) + " "};
  }
  int calls = 0;
};

GazetteerTable phrase_table(std::map<std::string, std::vector<std::string>> phrases) {
  GazetteerTable t;
  for (auto& [k, v] : phrases) t.add_phrase(k, std::move(v));
  return t;
}

}  // namespace

TEST_CASE("mask draw on the example sentence is pinned") {
  const auto tree = parse_bracketed(kFig2Tree, kFig2);
  CHECK(eligible_constituents(tree, kFig2, true).size() == 13);
  Rng rng = make_rng(2022);
  RewriteConfig config;
  const auto m = mask_constituent(kFig2, tree, rng, config);
  REQUIRE(m);
  // Recorded from the first run.
  CHECK(m->chosen.label == "PP");
  CHECK(m->chosen.char_span == CharSpan{20, 39});
  CHECK(m->chosen.text == "on February 7, 2016");
  CHECK(m->masked_sentence ==
        "The game was played [MASK] at Levi's Stadium in the San Francisco Bay Area at Santa "
        "Clara, California.");
}

TEST_CASE("mask draws are uniform over eligible constituents") {
  const auto tree = parse_bracketed(kFig2Tree, kFig2);
  const auto eligible = eligible_constituents(tree, kFig2, true);
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  Rng rng = make_rng(8);
  RewriteConfig config;
  const int n = 26000;
  for (int i = 0; i < n; ++i) {
    const auto m = mask_constituent(kFig2, tree, rng, config);
    counts[{m->chosen.char_span.start, m->chosen.char_span.end}]++;
  }
  // Nested nodes can share a span; count draws per distinct span.
  std::map<std::pair<std::size_t, std::size_t>, int> multiplicity;
  for (const auto& c : eligible) multiplicity[{c.char_span.start, c.char_span.end}]++;
  const double expected = static_cast<double>(n) / static_cast<double>(eligible.size());
  for (const auto& [span, mult] : multiplicity) {
    CHECK(counts[span] == doctest::Approx(expected * mult).epsilon(0.1));
  }
}

TEST_CASE("single eligible constituent is always chosen; none yields nullopt") {
  const std::string s = "Kickoff was February 7, 2016.";
  const auto tree = parse_bracketed("(S (NNP Kickoff) (VBD was) (NP (NNP February) (CD 7) (, ,) (CD 2016)) (. .))", s);
  Rng rng = make_rng(1);
  RewriteConfig config;
  for (int i = 0; i < 20; ++i) CHECK(mask_constituent(s, tree, rng, config)->chosen.text == "February 7, 2016");
  const auto flat = parse_bracketed("(S (NNP Kickoff) (VBD was) (. .))", "Kickoff was.");
  CHECK_FALSE(mask_constituent("Kickoff was.", flat, rng, config));
}

TEST_CASE("K=1 gazetteer date replacement gives one step") {
  const std::string s = "Kickoff was February 7, 2016.";
  TableParser parser(std::map<std::string, std::string>{
      {s, "(S (NNP Kickoff) (VBD was) (NP (NNP February) (CD 7) (, ,) (CD 2016)) (. .))"}});
  GazetteerFiller filler(phrase_table({{"February 7, 2016", {"December 7, 2015"}}}));
  Rng rng = make_rng(3);
  RewriteConfig config;
  const auto r = rewrite_sentence({s}, 0, filler, parser, config, rng);
  CHECK(r.sentence == "Kickoff was December 7, 2015.");
  REQUIRE(r.trace.steps.size() == 1);
  CHECK(r.trace.steps[0].original == "February 7, 2016");
  CHECK(r.trace.steps[0].replacement == "December 7, 2015");
  CHECK(r.trace.steps[0].span == CharSpan{12, 28});
}

TEST_CASE("K=2 steps chain on the rewritten text") {
  const std::string s0 = "It was played at Santa Clara, California.";
  const std::string s1 = "It was played at Atlanta, California.";
  TableParser parser(std::map<std::string, std::string>{
      {s0, "(S (PRP It) (VBD was) (VBN played) (IN at) (NP (NNP Santa) (NNP Clara)) (, ,) (NNP California) (. .))"},
      {s1, "(S (PRP It) (VBD was) (VBN played) (IN at) (NNP Atlanta) (, ,) (NP (NNP California)) (. .))"}});
  GazetteerFiller filler(phrase_table({{"Santa Clara", {"Atlanta"}}, {"California", {"Georgia"}}}));
  Rng rng = make_rng(4);
  RewriteConfig config;
  config.k_iterations = 2;
  const auto r = rewrite_sentence({s0}, 0, filler, parser, config, rng);
  CHECK(r.sentence == "It was played at Atlanta, Georgia.");
  REQUIRE(r.trace.steps.size() == 2);
  CHECK(r.trace.steps[0].iteration == 1);
  CHECK(r.trace.steps[1].iteration == 2);
  // The second span indexes the output of the first step.
  CHECK(r.trace.steps[1].span == CharSpan{26, 36});
  CHECK(text::substr(s1, r.trace.steps[1].span) == "California");
  CHECK(replay_trace(s0, r.trace) == r.sentence);
}

TEST_CASE("echo fills are rejected and leave the sentence unchanged") {
  ShallowParser parser;
  EchoFiller filler;
  Rng rng = make_rng(5);
  RewriteConfig config;
  config.k_iterations = 2;
  const auto r = rewrite_sentence({kFig2}, 0, filler, parser, config, rng);
  CHECK(r.sentence == kFig2);
  CHECK(r.trace.steps.empty());
  // Two iterations, three constituents each, five retries per constituent.
  CHECK(filler.calls == 2 * 3 * 5);
}

TEST_CASE("scripted fills: retries, masks and context") {
  const std::vector<std::string> sents = {"Denver won the title.", "The game was in Santa Clara.",
                                          "Fans cheered."};
  TableParser parser(std::map<std::string, std::string>{
      {sents[1], "(S (DT The) (NN game) (VBD was) (IN in) (NP (NNP Santa) (NNP Clara)) (. .))"}});
  ScriptedFiller filler({{"santa  CLARA"}, {"Atlanta [MASK]", "  "}, {"Atlanta", "Boston"}});
  Rng rng = make_rng(6);
  RewriteConfig config;
  const auto r = rewrite_sentence(sents, 1, filler, parser, config, rng);
  CHECK(r.sentence == "The game was in Atlanta.");
  REQUIRE(r.trace.steps.size() == 1);
  CHECK(r.trace.steps[0].retries_used == 2);
  REQUIRE(filler.calls().size() == 3);
  const auto& req = filler.calls()[0].request;
  CHECK(req.first_sentence == sents[0]);
  CHECK(req.previous_sentence == sents[0]);
  CHECK(req.masked_sentence == "The game was in [MASK].");
  CHECK(req.next_sentence == sents[2]);
  CHECK(filler.calls()[0].label == "NP");
  CHECK(filler.calls()[0].original == "Santa Clara");
}

TEST_CASE("fill context at paragraph edges") {
  const std::vector<std::string> sents = {"Denver won the title."};
  TableParser parser(std::map<std::string, std::string>{
      {sents[0], "(S (NP (NNP Denver)) (VBD won) (DT the) (NN title) (. .))"}});
  ScriptedFiller filler({{"Boston"}});
  Rng rng = make_rng(7);
  const auto r = rewrite_sentence(sents, 0, filler, parser, RewriteConfig{}, rng);
  CHECK(r.sentence == "Boston won the title.");
  const auto& req = filler.calls()[0].request;
  CHECK(req.previous_sentence.empty());
  CHECK(req.next_sentence.empty());
  CHECK(req.first_sentence.empty());
}

TEST_CASE("config validation") {
  RewriteConfig c;
  c.k_iterations = 0;
  CHECK_THROWS_WITH_AS(c.validate(), "K must be >= 1", ContractError);
  c = {};
  c.mask_token.clear();
  CHECK_THROWS_AS(c.validate(), ContractError);
  ShallowParser parser;
  EchoFiller filler;
  Rng rng = make_rng(1);
  CHECK_THROWS_AS(rewrite_sentence({"a"}, 3, filler, parser, RewriteConfig{}, rng), ContractError);
}

TEST_CASE("paragraph rewrite keeps order and produces one trace per sentence") {
  const std::string p = "Denver won the title.  The game was in Santa Clara.\nFans cheered loudly.";
  ShallowParser parser;
  GazetteerTable table;
  table.labels["NP"] = {"Boston", "the cup", "Atlanta"};
  GazetteerFiller filler(table);
  Rng rng = make_rng(9);
  RewriteConfig config;
  const auto r = rewrite_paragraph(p, filler, parser, config, rng);
  REQUIRE(r.traces.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.traces[i].sentence_index == i);
    CHECK(r.traces[i].steps.size() <= 1);
  }
  CHECK(replay_paragraph(p, r.traces) == r.fake_text);
  CHECK((r.fake_text != p) == std::any_of(r.traces.begin(), r.traces.end(),
                                           [](const EditTrace& t) { return !t.steps.empty(); }));
  // The layout between sentences survives.
  CHECK(r.fake_text.find("  ") != std::string::npos);
  CHECK(r.fake_text.find('\n') != std::string::npos);

  Rng again = make_rng(9);
  const auto r2 = rewrite_paragraph(p, filler, parser, config, again);
  CHECK(r2.fake_text == r.fake_text);
  CHECK(r2.traces == r.traces);

  Rng empty_rng = make_rng(9);
  const auto empty = rewrite_paragraph("   ", filler, parser, config, empty_rng);
  CHECK(empty.fake_text == "   ");
  CHECK(empty.traces.empty());
}

TEST_CASE("traces serialize and replay rejects mismatches") {
  EditTrace t{2, {{1, {0, 6}, "NP", "Denver", "Boston", 0}, {2, {7, 10}, "VP", "won", "lost", 1}}};
  CHECK(trace_from_json(Json::parse(to_json(t).dump())) == t);
  CHECK(replay_trace("Denver won.", t) == "Boston lost.");
  CHECK_THROWS_AS(replay_trace("Dallas won.", t), ContractError);
}

TEST_CASE("property: trace replay and preservation outside the masked span") {
  ShallowParser parser;
  GazetteerTable table;
  table.labels["NP"] = {"the crowd", "Atlanta", "a small band"};
  table.labels["PP"] = {"in Georgia", "at night"};
  table.labels["VP"] = {"lost badly", "was cancelled"};
  table.labels["ADVP"] = {"slowly"};
  GazetteerFiller filler(table);
  const std::vector<std::string> paragraphs = {
      "Denver won the title in 2016. The game was played at Santa Clara, California. Fans cheered.",
      "Tesla worked every day from 9:00 am until 6:00 pm. He lived in New York.",
      "Warsaw is the capital of Poland. It has many parks and museums."};
  for (int run = 0; run < 60; ++run) {
    const std::string& p = paragraphs[static_cast<std::size_t>(run) % paragraphs.size()];
    RewriteConfig config;
    config.k_iterations = 1 + run % 3;
    Rng rng = make_rng(mix_seed(77, static_cast<std::uint64_t>(run)));
    const auto r = rewrite_paragraph(p, filler, parser, config, rng);
    CHECK(replay_paragraph(p, r.traces) == r.fake_text);
    const auto sents = sentence_split(p);
    for (const auto& t : r.traces) {
      CHECK(t.steps.size() <= static_cast<std::size_t>(config.k_iterations));
      std::string cur = sents[t.sentence_index].text;
      for (const auto& step : t.steps) {
        const std::string next = splice(cur, step.span, step.replacement);
        CHECK(text::substr(next, {0, step.span.start}) == text::substr(cur, {0, step.span.start}));
        CHECK(text::substr(next, {step.span.start + text::length(step.replacement), text::length(next)}) ==
              text::substr(cur, {step.span.end, text::length(cur)}));
        cur = next;
      }
    }
  }
}

// ---------------------------------------------------------------- prefix

namespace {

class FixedCompleter final : public Completer {
 public:
  explicit FixedCompleter(std::string out) : out_(std::move(out)) {}
  std::string complete(std::string_view prompt, std::size_t max_tokens, std::uint64_t) override {
    last_prompt = prompt;
    last_max = max_tokens;
    return out_;
  }
  std::string last_prompt;
  std::size_t last_max = 0;

 private:
  std::string out_;
};

}  // namespace

TEST_CASE("prefix completion arithmetic") {
  const std::string p = "one two three four five six seven eight nine ten";
  FixedCompleter none("");
  auto r = prefix_completion_rewrite(p, none, 0.2);
  CHECK(r.prefix_tokens == 2);
  CHECK(r.fake_text == "one two");
  CHECK(none.last_prompt == "one two");
  CHECK(none.last_max == 13);
  CHECK_FALSE(r.warnings.empty());

  FixedCompleter echo("three four five six seven eight nine ten");
  r = prefix_completion_rewrite(p, echo, 0.2);
  CHECK(r.fake_text == p);
  REQUIRE_FALSE(r.warnings.empty());
  CHECK(r.warnings.back().rfind("zero-edit", 0) == 0);

  std::string longer;
  for (int i = 0; i < 40; ++i) longer += "w ";
  FixedCompleter verbose(longer);
  r = prefix_completion_rewrite(p, verbose, 0.2);
  CHECK(text::whitespace_tokens(r.fake_text).size() == 15);

  CHECK(prefix_completion_rewrite("a b c d e f g h i j k l m n o", none, 0.2).prefix_tokens == 3);
  CHECK_THROWS_AS(prefix_completion_rewrite(p, none, 0.0), ContractError);
  CHECK_THROWS_AS(prefix_completion_rewrite(p, none, 1.0), ContractError);
}
