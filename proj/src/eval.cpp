#include "contraforge/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "contraforge/error.hpp"
#include "contraforge/parallel.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

namespace {

char32_t lower_cp(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

bool is_ascii_punct(char32_t c) { return c < 0x80 && std::ispunct(static_cast<int>(c)); }

// Approximates the regex \w class for the scripts found in SQuAD.
bool is_word_cp(char32_t c) {
  if (c < 0x80) return std::isalnum(static_cast<int>(c)) || c == U'_';
  if (c < 0xC0 || c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x206F) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  return true;
}

bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

std::vector<std::string> answer_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : text::whitespace_tokens(normalize_answer(s))) out.push_back(std::move(t.text));
  return out;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::multiset<std::string> remaining(gold.begin(), gold.end());
  std::size_t same = 0;
  for (const auto& t : pred) {
    auto it = remaining.find(t);
    if (it != remaining.end()) {
      ++same;
      remaining.erase(it);
    }
  }
  if (same == 0) return 0.0;
  // 2PR / (P + R) reduces to 2 * same / (|pred| + |gold|).
  return static_cast<double>(2 * same) / static_cast<double>(pred.size() + gold.size());
}

bool better(const ScoredAnswer& a, const ScoredAnswer& b, bool use_fusion) {
  const double sa = use_fusion ? a.fused_score : a.span_score;
  const double sb = use_fusion ? b.fused_score : b.span_score;
  if (sa != sb) return sa > sb;
  if (a.context_index != b.context_index) return a.context_index < b.context_index;
  return a.char_span.start < b.char_span.start;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
  std::u32string u = text::to_u32(s);
  std::u32string lowered;
  lowered.reserve(u.size());
  for (char32_t c : u) {
    c = lower_cp(c);
    if (!is_ascii_punct(c)) lowered.push_back(c);
  }
  // Articles become spaces when they form a whole word.
  std::u32string no_articles;
  no_articles.reserve(lowered.size());
  for (std::size_t i = 0; i < lowered.size();) {
    if (!is_word_cp(lowered[i])) {
      no_articles.push_back(lowered[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < lowered.size() && is_word_cp(lowered[j])) ++j;
    const std::u32string_view word(lowered.data() + i, j - i);
    if (word == U"a" || word == U"an" || word == U"the") {
      no_articles.push_back(U' ');
    } else {
      no_articles.append(word);
    }
    i = j;
  }
  std::u32string out;
  bool pending = false;
  for (char32_t c : no_articles) {
    if (is_space_cp(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(U' ');
    pending = false;
    out.push_back(c);
  }
  return text::to_utf8(out);
}

int exact_match(std::string_view prediction, const std::vector<std::string>& golds) {
  const std::string p = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return 1;
  }
  return 0;
}

double f1_score(std::string_view prediction, const std::vector<std::string>& golds) {
  const auto pred = answer_tokens(prediction);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, f1_single(pred, answer_tokens(g)));
  return best;
}

double fuse(double span_score, double trust, double lambda) {
  for (double v : {span_score, trust, lambda}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("fuse: inputs must lie in [0, 1]");
  }
  return lambda * span_score + (1.0 - lambda) * trust;
}

ScoredAnswer aggregate_answer(const std::vector<ScoredAnswer>& candidates, bool use_fusion) {
  if (candidates.empty()) throw ContractError("aggregate_answer: no candidates");
  const ScoredAnswer* best = &candidates.front();
  for (const auto& c : candidates) {
    if (better(c, *best, use_fusion)) best = &c;
  }
  return *best;
}

std::size_t levenshtein(std::string_view a_text, std::string_view b_text) {
  std::u32string a = text::to_u32(a_text);
  std::u32string b = text::to_u32(b_text);
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  const std::u32string_view x(a.data() + prefix, a.size() - prefix - suffix);
  const std::u32string_view y(b.data() + prefix, b.size() - prefix - suffix);
  if (x.empty()) return y.size();
  if (y.empty()) return x.size();

  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t above = row[j];
      const std::size_t substitution = diagonal + (x[i - 1] == y[j - 1] ? 0 : 1);
      row[j] = std::min({above + 1, row[j - 1] + 1, substitution});
      diagonal = above;
    }
  }
  return row[y.size()];
}

double edit_metric(const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [original, fake] : pairs) {
    const std::size_t len = text::length(original);
    if (len == 0) throw ContractError("edit_metric: original text is empty");
    total += 100.0 * static_cast<double>(levenshtein(fake, original)) / static_cast<double>(len);
  }
  return total / static_cast<double>(pairs.size());
}

std::string_view to_string(EvalSetting s) {
  switch (s) {
    case EvalSetting::squad:
      return "squad";
    case EvalSetting::squad_random_ctx:
      return "squad_random_ctx";
    case EvalSetting::contra:
      return "contra";
    case EvalSetting::contra_with_detector:
      return "contra_with_detector";
  }
  return "unknown";
}

EvalSetting eval_setting_from_string(std::string_view s) {
  for (auto v : {EvalSetting::squad, EvalSetting::squad_random_ctx, EvalSetting::contra,
                 EvalSetting::contra_with_detector}) {
    if (to_string(v) == s) return v;
  }
  throw ContractError("unknown evaluation setting '" + std::string(s) + "'");
}

AttributionHistogram attribute_errors(const std::vector<ContraSample>& samples,
                                      const std::vector<SampleOutcome>& outcomes) {
  AttributionHistogram h;
  for (const auto& o : outcomes) {
    if (o.errored || o.correct) continue;
    if (o.sample_index >= samples.size() ||
        o.chosen_context_index >= samples[o.sample_index].contexts.size()) {
      throw ContractError("attribute_errors: outcome refers to a missing context");
    }
    ++h.counts[provenance_class(samples[o.sample_index].contexts[o.chosen_context_index].provenance)];
    ++h.total_wrong;
  }
  return h;
}

double detector_eval(const std::vector<double>& trust_scores, const std::vector<bool>& is_real,
                     double threshold) {
  if (trust_scores.size() != is_real.size()) {
    throw ContractError("detector_eval: score and label counts differ");
  }
  if (trust_scores.empty()) throw ContractError("detector_eval: no paragraphs");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < trust_scores.size(); ++i) {
    const bool predicted_real = trust_scores[i] >= threshold;
    correct += predicted_real == is_real[i] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(trust_scores.size());
}

namespace {

struct ContextTrust {
  std::string key;
  double trust;
  bool real;
};

struct SampleWork {
  SampleOutcome outcome;
  std::vector<ContextTrust> trusts;
};

SampleWork evaluate_sample(const ContraSample& sample, std::size_t index, Reader& reader,
                           Detector* detector, const EvalConfig& config) {
  SampleWork work;
  work.outcome.sample_index = index;

  // Indices into sample.contexts that take part in this setting.
  std::vector<std::size_t> used;
  if (config.setting == EvalSetting::squad) {
    used.push_back(sample.real_index);
  } else {
    std::size_t fakes = 0;
    for (std::size_t i = 0; i < sample.contexts.size(); ++i) {
      if (sample.contexts[i].provenance.is_real()) {
        used.push_back(i);
      } else if (!config.n_fakes || fakes < *config.n_fakes) {
        ++fakes;
        used.push_back(i);
      }
    }
  }
  const bool fusion = config.setting == EvalSetting::contra_with_detector;

  std::vector<ScoredAnswer> candidates;
  try {
    for (std::size_t i : used) {
      const Paragraph& ctx = sample.contexts[i];
      ScoredAnswer a = reader.read(sample.question, ctx.text);
      check_answer(a, ctx.text);
      a.context_index = i;
      if (fusion) {
        ContextView view{ctx.text, std::nullopt};
        if (detector->needs_provenance()) view.provenance = ctx.provenance;
        a.trust_score = detector->trust(view);
        a.fused_score = fuse(a.span_score, a.trust_score, config.lambda);
        work.trusts.push_back({ctx.id + "/" + provenance_class(ctx.provenance), a.trust_score,
                               ctx.provenance.is_real()});
      } else {
        a.fused_score = a.span_score;
      }
      candidates.push_back(std::move(a));
    }
  } catch (const Error& e) {
    work.outcome.errored = true;
    work.outcome.error = e.what();
    return work;
  }

  const ScoredAnswer best = aggregate_answer(candidates, fusion);
  work.outcome.chosen_context_index = best.context_index;
  work.outcome.chosen_provenance = provenance_class(sample.contexts[best.context_index].provenance);
  work.outcome.prediction = best.text;
  work.outcome.em = exact_match(best.text, sample.gold_answers);
  work.outcome.f1 = f1_score(best.text, sample.gold_answers);
  work.outcome.correct = work.outcome.em == 1;
  return work;
}

}  // namespace

EvalReport run_evaluation(const std::vector<ContraSample>& samples, Reader& reader,
                          Detector* detector, const EvalConfig& config) {
  if (config.setting == EvalSetting::contra_with_detector && detector == nullptr) {
    throw ContractError("the contra_with_detector setting needs a detector");
  }
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw ContractError("lambda must lie in [0, 1]");
  }
  std::vector<SampleWork> work(samples.size());
  parallel_for(samples.size(), config.jobs, [&](std::size_t i) {
    work[i] = evaluate_sample(samples[i], i, reader, detector, config);
  });

  EvalReport report;
  report.setting = config.setting;
  report.lambda = config.lambda;
  report.n_fakes = config.n_fakes;
  double em_sum = 0.0;
  double f1_sum = 0.0;
  std::map<std::string, ContextTrust> trusts;
  for (auto& w : work) {
    if (w.outcome.errored) {
      ++report.n_errored;
    } else {
      ++report.n_samples;
      em_sum += w.outcome.em;
      f1_sum += w.outcome.f1;
    }
    for (auto& t : w.trusts) trusts.emplace(t.key, t);
    report.per_sample.push_back(std::move(w.outcome));
  }
  if (report.n_samples > 0) {
    report.em = 100.0 * em_sum / static_cast<double>(report.n_samples);
    report.f1 = 100.0 * f1_sum / static_cast<double>(report.n_samples);
  }
  if (!trusts.empty()) {
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto& [key, t] : trusts) {
      scores.push_back(t.trust);
      labels.push_back(t.real);
    }
    report.detector_accuracy = detector_eval(scores, labels, config.threshold);
  }
  report.attribution = attribute_errors(samples, report.per_sample);
  return report;
}

std::vector<EvalReport> run_fake_count_sweep(const std::vector<ContraSample>& samples,
                                             Reader& reader, Detector* detector,
                                             const EvalConfig& config, std::size_t max_fakes) {
  std::vector<EvalReport> out;
  for (std::size_t n = 0; n <= max_fakes; ++n) {
    EvalConfig c = config;
    c.n_fakes = n;
    out.push_back(run_evaluation(samples, reader, detector, c));
  }
  return out;
}

OrderedJson outcome_json(const SampleOutcome& o) {
  OrderedJson j;
  j["sample_index"] = o.sample_index;
  j["chosen_context_index"] = o.chosen_context_index;
  j["chosen_provenance"] = o.chosen_provenance;
  j["prediction"] = o.prediction;
  j["em"] = o.em;
  j["f1"] = o.f1;
  j["correct"] = o.correct;
  j["errored"] = o.errored;
  if (o.errored) j["error"] = o.error;
  return j;
}

OrderedJson report_json(const EvalReport& r, bool include_per_sample) {
  OrderedJson j;
  j["setting"] = to_string(r.setting);
  j["em"] = r.em;
  j["f1"] = r.f1;
  j["n_samples"] = r.n_samples;
  j["n_errored"] = r.n_errored;
  j["lambda"] = r.lambda;
  j["n_fakes"] = r.n_fakes ? OrderedJson(*r.n_fakes) : OrderedJson(nullptr);
  j["detector_accuracy"] =
      r.detector_accuracy ? OrderedJson(*r.detector_accuracy) : OrderedJson(nullptr);
  OrderedJson attribution;
  attribution["total_wrong"] = r.attribution.total_wrong;
  attribution["counts"] = OrderedJson::object();
  for (const auto& [k, v] : r.attribution.counts) attribution["counts"][k] = v;
  j["attribution"] = std::move(attribution);
  if (include_per_sample) {
    OrderedJson rows = OrderedJson::array();
    for (const auto& o : r.per_sample) rows.push_back(outcome_json(o));
    j["per_sample"] = std::move(rows);
  }
  return j;
}

std::string report_table(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %5s %8s %8s %9s %8s %9s\n", "setting", "N", "EM", "F1",
                "samples", "errored", "detector");
  out << line;
  for (const auto& r : reports) {
    const std::string n = r.n_fakes ? std::to_string(*r.n_fakes) : "all";
    char det[32] = "-";
    if (r.detector_accuracy) std::snprintf(det, sizeof det, "%.2f", *r.detector_accuracy);
    std::snprintf(line, sizeof line, "%-22s %5s %8.2f %8.2f %9zu %8zu %9s\n",
                  std::string(to_string(r.setting)).c_str(), n.c_str(), r.em, r.f1, r.n_samples,
                  r.n_errored, det);
    out << line;
  }
  return out.str();
}

}  // namespace contraforge
