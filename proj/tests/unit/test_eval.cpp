#include <map>

#include "contraforge/baselines.hpp"
#include "contraforge/error.hpp"
#include "contraforge/eval.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace contraforge;

TEST_CASE("answer normalization") {
  CHECK(normalize_answer("The  Denver Broncos!") == "denver broncos");
  CHECK(normalize_answer("an apple, a pear") == "apple pear");
  CHECK(normalize_answer("theatre") == "theatre");
  CHECK(normalize_answer("Ölten") == "ölten");
  CHECK(normalize_answer("...") == "");
}

TEST_CASE("hand-computed EM/F1 table") {
  const auto& cases = testing::metric_cases();
  REQUIRE(cases.size() == 20);
  for (const auto& c : cases) {
    CAPTURE(c.prediction);
    CHECK(exact_match(c.prediction, c.golds) == c.em);
    CHECK(f1_score(c.prediction, c.golds) == doctest::Approx(c.f1).epsilon(1e-12));
  }
}

TEST_CASE("levenshtein against the memoized oracle") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("Zürich", "Zurich") == 1);
  CHECK(levenshtein("😀a", "a😀") == 2);
  Rng rng = make_rng(21);
  const std::u32string alphabet = U"abcü😀 ";
  for (int i = 0; i < 2000; ++i) {
    std::u32string a, b;
    const auto la = uniform_index(rng, 13), lb = uniform_index(rng, 13);
    for (std::size_t k = 0; k < la; ++k) a += alphabet[uniform_index(rng, alphabet.size())];
    for (std::size_t k = 0; k < lb; ++k) b += alphabet[uniform_index(rng, alphabet.size())];
    CHECK(levenshtein(text::to_utf8(a), text::to_utf8(b)) == testing::levenshtein_oracle(a, b));
  }
}

TEST_CASE("edit metric") {
  CHECK(edit_metric({}) == 0.0);
  CHECK(edit_metric({{"abcd", "abcd"}}) == 0.0);
  CHECK(edit_metric({{"abcd", "abXd"}, {"ab", ""}}) == doctest::Approx((25.0 + 100.0) / 2));
  CHECK_THROWS_AS(edit_metric({{"", "x"}}), ContractError);
}

TEST_CASE("fusion") {
  CHECK(fuse(0.8, 0.2, 0.5) == doctest::Approx(0.5));
  CHECK(fuse(0.8, 0.2, 1.0) == 0.8);
  CHECK(fuse(0.8, 0.2, 0.0) == 0.2);
  CHECK_THROWS_AS(fuse(1.2, 0.2, 0.5), ContractError);
  CHECK_THROWS_AS(fuse(0.2, -0.1, 0.5), ContractError);
  CHECK_THROWS_AS(fuse(0.2, 0.1, 2.0), ContractError);
}

TEST_CASE("aggregation ties") {
  std::vector<ScoredAnswer> c = {
      {"b", {5, 6}, 0.5, 1.0, 0.2, 1},
      {"a", {0, 1}, 0.5, 1.0, 0.9, 1},
      {"c", {0, 1}, 0.5, 1.0, 0.1, 0},
  };
  CHECK(aggregate_answer(c, false).text == "c");
  CHECK(aggregate_answer(c, true).text == "a");
  c.pop_back();
  CHECK(aggregate_answer(c, false).text == "a");
  CHECK_THROWS_AS(aggregate_answer({}, false), ContractError);
}

TEST_CASE("detector accuracy and attribution") {
  CHECK(detector_eval({0.9, 0.1, 0.5, 0.4}, {true, false, false, true}) == 50.0);
  CHECK(detector_eval({0.5}, {true}, 0.5) == 100.0);
  CHECK_THROWS_AS(detector_eval({}, {}), ContractError);
  CHECK_THROWS_AS(detector_eval({0.1}, {}), ContractError);
}

namespace {

// Reader with a fixed answer and score per paragraph text.
class TableReader final : public Reader {
 public:
  std::map<std::string, std::pair<std::string, double>> table;
  ScoredAnswer read(std::string_view, std::string_view paragraph) override {
    const auto it = table.find(std::string(paragraph));
    if (it == table.end()) throw BackendError("read test", "no entry");
    const auto& [answer, score] = it->second;
    const auto pos = std::string(paragraph).find(answer);
    const std::size_t start = text::length(std::string(paragraph).substr(0, pos));
    return {answer, {start, start + text::length(answer)}, score, 1.0, 0.0, 0};
  }
};

ContraSample sample(const std::string& real, const std::vector<std::string>& fakes,
                    std::vector<std::string> golds) {
  ContraSample s;
  s.question = "q";
  s.gold_answers = std::move(golds);
  s.contexts.push_back(make_paragraph(real, Provenance::real()));
  for (std::size_t i = 0; i < fakes.size(); ++i) {
    s.contexts.push_back(make_paragraph(fakes[i], i % 2 ? Provenance::human_fake() : Provenance::model_fake(1)));
  }
  return s;
}

}  // namespace

TEST_CASE("evaluation settings, fusion and attribution") {
  TableReader reader;
  reader.table = {{"Denver won.", {"Denver", 0.5}},
                  {"Carolina won.", {"Carolina", 0.9}},
                  {"Boston won.", {"Boston", 0.3}},
                  {"Miami won.", {"Miami", 0.95}}};
  std::vector<ContraSample> samples = {sample("Denver won.", {"Carolina won.", "Boston won."}, {"Denver"}),
                                       sample("Denver won.", {"Boston won.", "Miami won."}, {"Denver"})};
  OracleDetector oracle;

  EvalConfig config;
  config.setting = EvalSetting::squad;
  auto r = run_evaluation(samples, reader, nullptr, config);
  CHECK(r.em == 100.0);
  CHECK(r.n_samples == 2);

  config.setting = EvalSetting::contra;
  r = run_evaluation(samples, reader, nullptr, config);
  CHECK(r.em == 0.0);
  CHECK(r.attribution.total_wrong == 2);
  CHECK(r.attribution.counts["model_fake_k1"] == 1);
  CHECK(r.attribution.counts["human_fake"] == 1);
  CHECK(r.per_sample[0].prediction == "Carolina");
  CHECK(r.per_sample[0].chosen_provenance == "model_fake_k1");
  CHECK_FALSE(r.detector_accuracy);

  config.n_fakes = 0;
  CHECK(run_evaluation(samples, reader, nullptr, config).em == 100.0);
  config.n_fakes = 1;
  // Sample 1 keeps only "Boston won." which loses to the real context.
  CHECK(run_evaluation(samples, reader, nullptr, config).em == 50.0);
  config.n_fakes.reset();

  config.setting = EvalSetting::contra_with_detector;
  config.lambda = 0.5;
  r = run_evaluation(samples, reader, &oracle, config);
  CHECK(r.em == 100.0);
  CHECK(r.detector_accuracy == 100.0);
  config.lambda = 1.0;
  CHECK(run_evaluation(samples, reader, &oracle, config).em == 0.0);

  ConstantDetector half(0.5);
  r = run_evaluation(samples, reader, &half, config);
  // Paragraphs are deduplicated by (id, provenance class). "Denver won." is
  // counted once; "Boston won." appears as two classes. Only the real one
  // of the 5 is classified correctly.
  REQUIRE(r.detector_accuracy);
  CHECK(*r.detector_accuracy == 20.0);

  CHECK_THROWS_AS(run_evaluation(samples, reader, nullptr, config), ContractError);
}

TEST_CASE("reader failures mark samples as errored") {
  TableReader reader;
  reader.table = {{"Denver won.", {"Denver", 0.5}}};
  std::vector<ContraSample> samples = {sample("Denver won.", {}, {"Denver"}),
                                       sample("Denver won.", {"Unknown won."}, {"Denver"})};
  EvalConfig config;
  const auto r = run_evaluation(samples, reader, nullptr, config);
  CHECK(r.n_samples == 1);
  CHECK(r.n_errored == 1);
  CHECK(r.em == 100.0);
  CHECK(r.per_sample[1].errored);
  CHECK(r.per_sample[1].error.find("no entry") != std::string::npos);
}

TEST_CASE("parallel evaluation matches the sequential run") {
  const auto samples = testing::direction_samples(3);
  OverlapReader reader;
  OracleDetector oracle;
  EvalConfig config;
  config.setting = EvalSetting::contra_with_detector;
  config.jobs = 1;
  const auto seq = run_evaluation(samples, reader, &oracle, config);
  config.jobs = 8;
  const auto par = run_evaluation(samples, reader, &oracle, config);
  CHECK(report_json(seq, true).dump() == report_json(par, true).dump());
}

TEST_CASE("property: EM falls as fakes are added and the oracle detector restores it") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto samples = testing::direction_samples(seed);
    OverlapReader reader;
    EvalConfig config;
    const auto sweep = run_fake_count_sweep(samples, reader, nullptr, config, 4);
    REQUIRE(sweep.size() == 5);
    for (std::size_t n = 1; n < sweep.size(); ++n) CHECK(sweep[n].em <= sweep[n - 1].em);
    CHECK(sweep[4].em < sweep[0].em);
    CHECK(sweep[0].em == 100.0);

    OracleDetector oracle;
    config.setting = EvalSetting::contra_with_detector;
    const auto defended = run_evaluation(samples, reader, &oracle, config);
    CHECK(defended.em >= sweep[4].em);
    CHECK(defended.em == 100.0);
  }
}

TEST_CASE("report rendering") {
  EvalReport r;
  r.setting = EvalSetting::contra;
  r.em = 50;
  r.f1 = 62.5;
  r.n_samples = 4;
  r.n_fakes = 2;
  const auto j = report_json(r);
  CHECK(j["setting"] == "contra");
  CHECK(j["n_fakes"] == 2);
  CHECK(j["detector_accuracy"].is_null());
  const std::string table = report_table({r});
  CHECK(table.find("contra") != std::string::npos);
  CHECK(table.find("50.00") != std::string::npos);
  CHECK(eval_setting_from_string("squad_random_ctx") == EvalSetting::squad_random_ctx);
  CHECK_THROWS_AS(eval_setting_from_string("nope"), ContractError);
}
