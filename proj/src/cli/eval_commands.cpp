#include <cstdio>
#include <map>

#include "common.hpp"
#include "contraforge/eval.hpp"
#include "contraforge/log.hpp"

namespace contraforge::cli {

namespace {

struct EvaluateOptions {
  std::string dataset;
  std::string reader;
  std::string detector;
  bool detector_provenance = false;
  double lambda = 0.5;
  std::string setting;
  int n_fakes = -1;
  bool sweep = false;
  std::size_t sweep_max = 4;
  double threshold = 0.5;
  std::string report;
  std::string per_sample;
};

int evaluate(Context& ctx, const EvaluateOptions& o) {
  if (!(o.lambda >= 0.0 && o.lambda <= 1.0)) throw UsageError("--lambda must lie in [0, 1]");
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
  if (o.sweep && o.n_fakes >= 0) throw UsageError("--n-fakes and --n-fakes-sweep are exclusive");

  auto reader = resolve_reader(ctx, o.reader);
  auto detector = resolve_detector(ctx, o.detector, o.detector_provenance);
  EvalConfig config;
  try {
    config.setting = o.setting.empty() ? (detector.impl ? EvalSetting::contra_with_detector
                                                        : EvalSetting::contra)
                                       : eval_setting_from_string(o.setting);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  if (config.setting == EvalSetting::contra_with_detector && !detector.impl) {
    throw UsageError("the contra_with_detector setting needs --detector");
  }
  if (config.setting != EvalSetting::contra_with_detector && detector.impl) {
    log::warning("--detector is ignored outside the contra_with_detector setting");
  }
  config.lambda = o.lambda;
  config.threshold = o.threshold;
  config.jobs = ctx.jobs();
  if (o.n_fakes >= 0) config.n_fakes = static_cast<std::size_t>(o.n_fakes);

  const auto samples = read_dataset(o.dataset);
  std::vector<EvalReport> reports;
  if (o.sweep) {
    reports = run_fake_count_sweep(samples, *reader.impl, detector.impl.get(), config, o.sweep_max);
  } else {
    reports.push_back(run_evaluation(samples, *reader.impl, detector.impl.get(), config));
  }

  OrderedJson backends{{"read", reader.description}};
  if (detector.impl) backends["detect"] = detector.description;
  OrderedJson doc;
  doc["format"] = kReportFormat;
  doc["schema_version"] = 1;
  doc["meta"] = ctx.metadata(backends);
  doc["reports"] = OrderedJson::array();
  for (const auto& r : reports) doc["reports"].push_back(report_json(r));
  {
    auto out = open_output(o.report);
    out << doc.dump(2) << '\n';
  }
  if (!o.per_sample.empty()) {
    auto out = open_output(o.per_sample);
    write_line(out, header_json({std::string(kOutcomesFormat), 1, ctx.metadata(backends)}));
    for (const auto& r : reports) {
      for (const auto& s : r.per_sample) {
        OrderedJson row = outcome_json(s);
        row["n_fakes"] = r.n_fakes ? OrderedJson(*r.n_fakes) : OrderedJson(nullptr);
        write_line(out, row);
      }
    }
  }
  ctx.out << report_table(reports);

  std::size_t errored = 0;
  for (const auto& r : reports) errored += r.n_errored;
  if (errored > 0) {
    ctx.err << errored << " sample evaluations failed; see the per-sample errors\n";
    return kBackendFailure;
  }
  return kOk;
}

int edit_metric_command(Context& ctx, const std::string& dataset, const std::string& out_path) {
  const auto samples = read_dataset(dataset);
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_class;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::pair<std::string, std::string>> all;
  for (const auto& s : samples) {
    const Paragraph& real = s.contexts.at(s.real_index);
    for (const auto& c : s.contexts) {
      if (c.provenance.is_real() || c.provenance.kind == ProvenanceKind::distractor) continue;
      if (!seen.emplace(real.id, c.id).second) continue;
      by_class[provenance_class(c.provenance)].emplace_back(real.text, c.text);
      all.emplace_back(real.text, c.text);
    }
  }
  OrderedJson classes = OrderedJson::object();
  char line[128];
  for (const auto& [cls, pairs] : by_class) {
    const double v = edit_metric(pairs);
    classes[cls] = OrderedJson{{"pairs", pairs.size()}, {"edit", v}};
    std::snprintf(line, sizeof line, "%-20s %6zu %8.2f\n", cls.c_str(), pairs.size(), v);
    ctx.out << line;
  }
  const double overall = edit_metric(all);
  std::snprintf(line, sizeof line, "%-20s %6zu %8.2f\n", "all", all.size(), overall);
  ctx.out << line;
  if (!out_path.empty()) {
    OrderedJson doc;
    doc["format"] = kEditMetricFormat;
    doc["schema_version"] = 1;
    doc["meta"] = ctx.metadata();
    doc["pairs"] = all.size();
    doc["edit"] = overall;
    doc["by_provenance"] = std::move(classes);
    auto out = open_output(out_path);
    out << doc.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

void add_eval_commands(CLI::App& app, Context&, Command& chosen) {
  {
    auto* sub = app.add_subcommand("evaluate", "Evaluate a reader on a dataset");
    auto o = std::make_shared<EvaluateOptions>();
    sub->add_option("--dataset", o->dataset, "Dataset JSONL")->required();
    sub->add_option("--reader", o->reader, "overlap or a reader URL");
    sub->add_option("--detector", o->detector, "oracle, constant:<v> or a detector URL");
    sub->add_flag("--detector-provenance", o->detector_provenance,
                  "Send context provenance to a remote detector");
    sub->add_option("--lambda", o->lambda, "Weight of the reader score in fusion")
        ->capture_default_str();
    sub->add_option("--setting", o->setting,
                    "squad|squad_random_ctx|contra|contra_with_detector");
    sub->add_option("--n-fakes", o->n_fakes, "Keep the real context and the first N fakes");
    sub->add_flag("--n-fakes-sweep", o->sweep, "One row per N in 0..--sweep-max");
    sub->add_option("--sweep-max", o->sweep_max)->capture_default_str();
    sub->add_option("--threshold", o->threshold, "Detector decision threshold")
        ->capture_default_str();
    sub->add_option("--report", o->report, "Report JSON")->required();
    sub->add_option("--per-sample", o->per_sample, "Per-sample outcomes JSONL");
    sub->callback([&chosen, o] { chosen = [o](Context& c) { return evaluate(c, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("edit-metric", "Mean percentage edit distance of fakes");
    auto dataset = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--dataset", *dataset, "Dataset JSONL")->required();
    sub->add_option("--out", *out, "Result JSON");
    sub->callback([&chosen, dataset, out] {
      chosen = [dataset, out](Context& c) { return edit_metric_command(c, *dataset, *out); };
    });
  }
}

}  // namespace contraforge::cli
