#pragma once

// QA evaluation under contradicting contexts: SQuAD answer metrics, answer
// aggregation across contexts with optional detector fusion, edit-distance
// statistics, error attribution and detector accuracy.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "contraforge/backend.hpp"
#include "contraforge/squad.hpp"

namespace contraforge {

// Lowercase, drop ASCII punctuation, drop the articles a/an/the as whole
// words, collapse whitespace. Same rules as the official SQuAD evaluator.
std::string normalize_answer(std::string_view s);

// 1 if the prediction matches any gold after normalization.
int exact_match(std::string_view prediction, const std::vector<std::string>& golds);

// Best token-level F1 over the golds. Two empty token lists score 1.
double f1_score(std::string_view prediction, const std::vector<std::string>& golds);

// lambda * span_score + (1 - lambda) * trust. All inputs must be in [0, 1].
double fuse(double span_score, double trust, double lambda);

// Highest span_score (or fused_score with fusion), ties to the lowest
// context_index and then the lowest span start.
ScoredAnswer aggregate_answer(const std::vector<ScoredAnswer>& candidates, bool use_fusion);

// Code-point Levenshtein distance.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Mean over pairs of 100 * levenshtein(fake, original) / length(original).
// Pairs are (original, fake).
double edit_metric(const std::vector<std::pair<std::string, std::string>>& pairs);

enum class EvalSetting { squad, squad_random_ctx, contra, contra_with_detector };
std::string_view to_string(EvalSetting s);
EvalSetting eval_setting_from_string(std::string_view s);

struct SampleOutcome {
  std::size_t sample_index = 0;
  std::size_t chosen_context_index = 0;  // index into the sample's stored contexts
  std::string chosen_provenance;
  std::string prediction;
  int em = 0;
  double f1 = 0.0;
  bool correct = false;
  bool errored = false;
  std::string error;
};

struct AttributionHistogram {
  std::map<std::string, std::size_t> counts;  // provenance class -> wrong answers
  std::size_t total_wrong = 0;
};

AttributionHistogram attribute_errors(const std::vector<ContraSample>& samples,
                                      const std::vector<SampleOutcome>& outcomes);

// Percentage of paragraphs classified correctly when "real" is predicted
// for trust >= threshold.
double detector_eval(const std::vector<double>& trust_scores, const std::vector<bool>& is_real,
                     double threshold = 0.5);

struct EvalConfig {
  EvalSetting setting = EvalSetting::contra;
  double lambda = 0.5;
  std::optional<std::size_t> n_fakes;  // keep the real context and the first n fakes
  double threshold = 0.5;
  std::size_t jobs = 1;
};

struct EvalReport {
  EvalSetting setting = EvalSetting::contra;
  double em = 0.0;  // percentage
  double f1 = 0.0;  // percentage
  std::size_t n_samples = 0;
  std::size_t n_errored = 0;
  double lambda = 0.5;
  std::optional<std::size_t> n_fakes;
  std::optional<double> detector_accuracy;
  std::vector<SampleOutcome> per_sample;  // sorted by sample_index
  AttributionHistogram attribution;
};

// Reads every context with the reader (and the detector in the
// contra_with_detector setting), aggregates, and scores against the golds.
// A reader failure marks the sample as errored and excludes it from EM/F1.
EvalReport run_evaluation(const std::vector<ContraSample>& samples, Reader& reader,
                          Detector* detector, const EvalConfig& config);

// One report per N in [0, max_fakes].
std::vector<EvalReport> run_fake_count_sweep(const std::vector<ContraSample>& samples,
                                             Reader& reader, Detector* detector,
                                             const EvalConfig& config, std::size_t max_fakes = 4);

OrderedJson report_json(const EvalReport& report, bool include_per_sample = false);
OrderedJson outcome_json(const SampleOutcome& outcome);
std::string report_table(const std::vector<EvalReport>& reports);

}  // namespace contraforge
