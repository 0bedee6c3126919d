#include <set>
#include <sstream>

#include "contraforge/baselines.hpp"
#include "contraforge/error.hpp"
#include "contraforge/gcf.hpp"
#include "contraforge/ptb.hpp"
#include "contraforge/squad.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace contraforge;
using contraforge::testing::fixture;
using contraforge::testing::load_tree_corpus;

// ---------------------------------------------------------------- squad

TEST_CASE("SQuAD fixture loads with answers") {
  const auto paras = load_squad(fixture("squad/mini.json"));
  REQUIRE(paras.size() >= 3);
  const auto& sb = paras.front();
  CHECK(sb.paragraph.provenance.is_real());
  CHECK(sb.paragraph.id == paragraph_id(sb.paragraph.text));
  REQUIRE(sb.qas.size() == 3);
  CHECK(sb.qas[1].gold_answers == std::vector<std::string>{"Santa Clara, California", "Levi's Stadium"});
  for (const auto& qa : sb.qas) CHECK(qa.source_paragraph_id == sb.paragraph.id);
}

TEST_CASE("SQuAD errors") {
  CHECK_THROWS_AS(parse_squad("{\"data\": ["), FormatError);
  CHECK_THROWS_AS(parse_squad("{\"nodata\": []}"), FormatError);
  CHECK_THROWS_AS(parse_squad(R"({"data":[{"paragraphs":[{"context":"  ","qas":[]}]}]})"),
                  FormatError);
  // Unanswerable questions are dropped.
  const auto p = parse_squad(
      R"({"data":[{"paragraphs":[{"context":"A b.","qas":[{"question":"q","answers":[]}]}]}]})");
  REQUIRE(p.size() == 1);
  CHECK(p[0].qas.empty());
}

TEST_CASE("paragraph ids ignore whitespace layout") {
  CHECK(paragraph_id("a  b\nc") == paragraph_id("a b c"));
  CHECK(paragraph_id("a b c") != paragraph_id("a b d"));
  CHECK_THROWS_AS(make_paragraph("   ", Provenance::real()), ContractError);
  CHECK_THROWS_AS(Provenance::model_fake(0), ContractError);
  CHECK(provenance_class(Provenance::model_fake(2)) == "model_fake_k2");
  CHECK(provenance_class(Provenance::human_fake()) == "human_fake");
  for (auto k : {ProvenanceKind::real, ProvenanceKind::human_fake, ProvenanceKind::model_fake,
                 ProvenanceKind::prefix_fake, ProvenanceKind::distractor}) {
    CHECK(provenance_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(provenance_kind_from_string("bogus"), FormatError);
}

namespace {

std::vector<Paragraph> make_fakes(int n) {
  std::vector<Paragraph> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(make_paragraph("Fake number " + std::to_string(i) + ".", Provenance::model_fake(1 + i % 3)));
  }
  return out;
}

}  // namespace

TEST_CASE("property: assembled samples hold the real context exactly once") {
  const Paragraph real = make_paragraph("The real one.", Provenance::real());
  const std::vector<QaPair> qas = {{"q1", {"a"}, real.id}, {"q2", {"b"}, real.id}};
  std::set<std::vector<std::string>> orders;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto fakes = make_fakes(static_cast<int>(seed % 6));
    const auto samples = assemble_contra(real, fakes, qas, seed);
    REQUIRE(samples.size() == 2);
    for (const auto& s : samples) {
      CHECK_NOTHROW(check_sample(s));
      CHECK(s.contexts.size() == fakes.size() + 1);
      CHECK(s.contexts[s.real_index] == real);
      std::multiset<std::string> got, want{real.id};
      for (const auto& c : s.contexts) got.insert(c.id);
      for (const auto& f : fakes) want.insert(f.id);
      CHECK(got == want);
      if (fakes.size() == 5) {
        std::vector<std::string> ids;
        for (const auto& c : s.contexts) ids.push_back(c.id);
        orders.insert(ids);
      }
    }
    CHECK(assemble_contra(real, fakes, qas, seed) == samples);
  }
  // Real position is not fixed.
  CHECK(orders.size() > 5);
}

TEST_CASE("assembly contract violations") {
  const Paragraph real = make_paragraph("The real one.", Provenance::real());
  CHECK_THROWS_AS(assemble_contra(make_fakes(1)[0], {}, {}, 1), ContractError);
  CHECK_THROWS_AS(assemble_contra(real, {real}, {}, 1), ContractError);
  ContraSample bad;
  bad.contexts = make_fakes(2);
  CHECK_THROWS_AS(check_sample(bad), ContractError);
}

TEST_CASE("random contexts exclude the source and are distractors") {
  std::vector<Paragraph> pool;
  for (int i = 0; i < 10; ++i) pool.push_back(make_paragraph("Para " + std::to_string(i), Provenance::real()));
  const auto picked = sample_random_contexts(pool, 4, pool[3].id, 9);
  REQUIRE(picked.size() == 4);
  std::set<std::string> ids;
  for (const auto& p : picked) {
    CHECK(p.id != pool[3].id);
    CHECK(p.provenance.kind == ProvenanceKind::distractor);
    ids.insert(p.id);
  }
  CHECK(ids.size() == 4);
  CHECK(sample_random_contexts(pool, 4, pool[3].id, 9) == picked);
  CHECK_THROWS_AS(sample_random_contexts(pool, 10, pool[3].id, 9), ContractError);
  CHECK_THROWS_AS(sample_random_contexts(pool, 1, "missing", 9), ContractError);
}

TEST_CASE("truncate_fakes keeps stored order") {
  const Paragraph real = make_paragraph("The real one.", Provenance::real());
  const auto samples = assemble_contra(real, make_fakes(4), {{"q", {"a"}, real.id}}, 5);
  const auto& s = samples[0];
  for (std::size_t n = 0; n <= 4; ++n) {
    const auto t = truncate_fakes(s, n);
    CHECK(t.contexts.size() == n + 1);
    CHECK_NOTHROW(check_sample(t));
    std::vector<std::string> expected;
    std::size_t kept = 0;
    for (const auto& c : s.contexts) {
      if (c.provenance.is_real() || kept++ < n) expected.push_back(c.id);
    }
    std::vector<std::string> got;
    for (const auto& c : t.contexts) got.push_back(c.id);
    CHECK(got == expected);
  }
}

TEST_CASE("dataset JSONL round trip and version gate") {
  testing::TempDir dir;
  const Paragraph real = make_paragraph("Zürich is “big”.", Provenance::real());
  const auto samples = assemble_contra(real, make_fakes(3), {{"q", {"a", "b"}, real.id}}, 7);
  write_dataset(samples, dir / "d.jsonl", {{"seed", 7}});
  CHECK(read_dataset(dir / "d.jsonl") == samples);

  std::istringstream in(testing::read_text(dir / "d.jsonl"));
  DatasetReader reader(in);
  CHECK(reader.header().format == kDatasetFormat);
  CHECK(reader.header().meta["seed"] == 7);

  std::istringstream future(R"({"format":"contraqa","schema_version":99,"meta":{}})" "\n");
  CHECK_THROWS_AS(DatasetReader{future}, VersionError);
  std::istringstream headless(R"({"question":"q"})" "\n");
  CHECK_THROWS_AS(DatasetReader{headless}, FormatError);
}

// ---------------------------------------------------------------- ptb

TEST_CASE("tree fixture corpus round-trips") {
  const auto corpus = load_tree_corpus(fixture("ptb/corpus.tsv"));
  REQUIRE(corpus.size() == 50);
  for (const auto& [sentence, tree] : corpus) {
    const ParseTree t1 = parse_bracketed(tree, sentence);
    const std::string s1 = serialize(t1);
    const ParseTree t2 = parse_bracketed(s1, sentence);
    CHECK(t1 == t2);
    CHECK(serialize(t2) == s1);
    CHECK(s1 == canonical_bracketing(tree));
  }
}

TEST_CASE("leaf alignment uses code points and surface forms") {
  const std::string s = "He said (quietly) that Zürich won.";
  const auto t = parse_bracketed(
      "(S (NP (PRP He)) (VP (VBD said) (PRN (-LRB- -LRB-) (ADVP (RB quietly)) (-RRB- -RRB-)) "
      "(SBAR (IN that) (S (NP (NNP Zürich)) (VP (VBD won))))) (. .))",
      s);
  const auto spans = eligible_constituents(t, s, true);
  std::vector<std::string> texts;
  for (const auto& c : spans) {
    texts.push_back(c.text);
    CHECK(text::substr(s, c.char_span) == c.text);
  }
  CHECK(std::find(texts.begin(), texts.end(), "quietly") != texts.end());
  CHECK(std::find(texts.begin(), texts.end(), "Zürich") != texts.end());
  CHECK(std::find(texts.begin(), texts.end(), "that Zürich won") != texts.end());
  CHECK(std::find(texts.begin(), texts.end(), s) == texts.end());
}

TEST_CASE("empty elements get zero-width spans and are never eligible") {
  const std::string s = "What did he see?";
  const auto t = parse_bracketed(
      "(SBARQ (WHNP-1 (WP What)) (SQ (VBD did) (NP-SBJ (PRP he)) (VP (VB see) (NP (-NONE- *T*-1)))) (. ?))",
      s);
  for (const auto& c : eligible_constituents(t, s, false)) CHECK_FALSE(c.char_span.empty());
  CHECK(base_label("NP-SBJ-1") == "NP");
  CHECK(base_label("-NONE-") == "-NONE-");
  CHECK(is_eligible_label("WHPP"));
  CHECK_FALSE(is_eligible_label("NN"));
  CHECK(eligible_labels().size() == 11);
}

TEST_CASE("surface forms") {
  CHECK(surface_forms("-LRB-").front() == "-LRB-");
  const auto lrb = surface_forms("-LRB-");
  CHECK(std::find(lrb.begin(), lrb.end(), "(") != lrb.end());
  const auto q = surface_forms("``");
  CHECK(std::find(q.begin(), q.end(), "\"") != q.end());
  const auto frac = surface_forms("3\\/4");
  CHECK(std::find(frac.begin(), frac.end(), "3/4") != frac.end());
}

TEST_CASE("malformed trees") {
  CHECK_THROWS_AS(parse_bracketed("(S (NP (DT the) (NN game))", "the game"), ParseError);
  CHECK_THROWS_AS(parse_bracketed("(S (NP (DT the) (NN game))))", "the game"), ParseError);
  CHECK_THROWS_AS(parse_bracketed("", "the game"), ParseError);
  CHECK_THROWS_AS(parse_bracketed("(S (NP (DT the) (NN match)))", "the game"), AlignmentError);
  CHECK_THROWS_AS(parse_bracketed("(S (NP (DT the)))", "the game"), AlignmentError);
}

TEST_CASE("splice") {
  CHECK(splice("Zürich won.", {0, 6}, "[MASK]") == "[MASK] won.");
  CHECK(splice("abc", {1, 1}, "X") == "aXbc");
  CHECK_THROWS_AS(splice("abc", {2, 5}, "X"), ContractError);
}

TEST_CASE("property: shallow parser output always aligns and round-trips") {
  Rng rng = make_rng(5);
  const std::vector<std::string> words = {"the", "game", "was", "played", "in", "Zürich", ",",
                                          "on", "February", "7", "2016", "Levi's", "stadium",
                                          "(", ")", "\"", "and", "Tesla", "worked", "quickly",
                                          "3/4", "AT&T", "--", "won", "."};
  ShallowParser parser;
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const std::size_t n = 1 + uniform_index(rng, 14);
    for (std::size_t i = 0; i < n; ++i) {
      if (i && uniform_index(rng, 4) != 0) s += ' ';
      s += words[uniform_index(rng, words.size())];
    }
    if (text::trim(s).empty()) continue;
    const std::string tree = parser.parse(s);
    ParseTree t;
    REQUIRE_NOTHROW(t = parse_bracketed(tree, s));
    CHECK(parse_bracketed(serialize(t), s) == t);
    for (const auto& c : eligible_constituents(t, s, false)) {
      CHECK(text::substr(s, c.char_span) == c.text);
    }
  }
}

// ---------------------------------------------------------------- gcf

namespace {

std::vector<std::string> article(std::size_t n) {
  const std::vector<std::string> pool = {"The game was played in Santa Clara.",
                                         "Denver won the title.",
                                         "Tesla worked every day.",
                                         "The city of Warsaw is large.",
                                         "Chopin was born in Poland."};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[i % pool.size()]);
  return out;
}

}  // namespace

TEST_CASE("GCF example counts follow the interior range") {
  ShallowParser parser;
  Rng rng = make_rng(1);
  CHECK(build_examples("a", article(2), parser, rng).examples.empty());
  CHECK(build_examples("a", article(2), parser, rng).skipped_short_article);
  const auto r = build_examples("a", article(4), parser, rng);
  REQUIRE(r.examples.size() == 2);
  CHECK(r.examples[0].t == 2);
  CHECK(r.examples[1].t == 3);
  CHECK(r.examples[0].input.s_prev == r.examples[0].input.s1);
  CHECK(r.examples[1].input.s_prev == article(4)[1]);
  CHECK(r.examples[1].input.s_next == article(4)[3]);
}

TEST_CASE("GCF skips unmaskable and overlong sentences") {
  const std::vector<std::string> sents = {"First one.", "Hmm.", "Third one here.", "Last."};
  TableParser parser(std::map<std::string, std::string>{
      {"First one.", "(S (NP (JJ First) (NN one)) (. .))"},
      {"Hmm.", "(S (UH Hmm) (. .))"},
      {"Third one here.", "(S (NP (JJ Third) (NN one)) (ADVP (RB here)) (. .))"},
      {"Last.", "(S (JJ Last) (. .))"}});
  Rng rng = make_rng(2);
  const auto r = build_examples("x", sents, parser, rng);
  CHECK(r.examples.size() == 1);
  CHECK(r.skipped_unmaskable == 1);

  GcfConfig config;
  config.max_sentence_tokens = 2;
  Rng rng2 = make_rng(2);
  const auto r2 = build_examples("x", sents, parser, rng2, config);
  CHECK(r2.examples.empty());
  CHECK(r2.skipped_too_long == 1);
}

TEST_CASE("GCF word indices cover the target") {
  ShallowParser parser;
  Rng rng = make_rng(3);
  for (const auto& ex : build_examples("a", article(5), parser, rng).examples) {
    const std::string st = article(5)[ex.t - 1];
    const auto words = text::whitespace_tokens(st);
    REQUIRE(ex.a >= 1);
    REQUIRE(ex.b <= words.size());
    CHECK(ex.a <= ex.b);
    const auto pos = st.find(ex.target);
    REQUIRE(pos != std::string::npos);
    CHECK(reconstruct_sentence(ex, "[MASK]") == st);
    CHECK(count_occurrences(ex.input.masked_st, "[MASK]") == 1);
  }
}

TEST_CASE("GCF serialization round trip and rejection") {
  ShallowParser parser;
  Rng rng = make_rng(4);
  GcfConfig config;
  auto examples = build_examples("a", article(4), parser, rng, config).examples;
  REQUIRE(examples.size() == 2);
  std::stringstream out;
  auto rep = serialize_training(examples, out, config);
  CHECK(rep.written == 2);
  std::stringstream in(out.str());
  CHECK(read_training(in, config) == examples);

  const auto rec = training_record(examples[0], config);
  const std::string input = rec["input"];
  CHECK(input.find(" </s> ") != std::string::npos);
  CHECK(rec["output"] == examples[0].target);

  std::stringstream empty_out;
  CHECK(serialize_training({}, empty_out, config).written == 0);
  CHECK(empty_out.str().empty());

  examples[1].target = "has [MASK] inside";
  std::stringstream bad;
  rep = serialize_training(examples, bad, config);
  CHECK(rep.written == 1);
  CHECK(rep.rejected.size() == 1);
}
