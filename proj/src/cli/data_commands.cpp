#include <fstream>
#include <map>
#include <sstream>

#include "common.hpp"
#include "contraforge/gcf.hpp"
#include "contraforge/log.hpp"
#include "contraforge/parallel.hpp"
#include "contraforge/rewrite.hpp"
#include "contraforge/sentences.hpp"

namespace contraforge::cli {

namespace {

struct Article {
  std::string id;
  std::vector<std::string> sentences;
};

std::vector<std::string> split_text(std::string_view text) {
  std::vector<std::string> out;
  for (auto& s : sentence_split(text)) out.push_back(std::move(s.text));
  return out;
}

// JSONL articles ({"id", "text"} or {"id", "sentences"}) or SQuAD JSON, where
// the paragraphs of one title form one article.
std::vector<Article> load_articles(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<Article> out;
  try {
    const Json doc = Json::parse(content);
    if (doc.is_object() && doc.contains("data")) {
      for (const auto& entry : doc["data"]) {
        Article a;
        a.id = entry.value("title", "article-" + std::to_string(out.size()));
        for (const auto& p : entry.at("paragraphs")) {
          for (auto& s : split_text(p.at("context").get<std::string>())) a.sentences.push_back(s);
        }
        out.push_back(std::move(a));
      }
      return out;
    }
  } catch (const Json::parse_error&) {
  }
  std::istringstream in(content);
  JsonlReader reader(in);
  while (auto line = reader.next()) {
    if (parse_header(*line)) continue;
    Article a;
    a.id = line->value("id", "article-" + std::to_string(out.size()));
    if (line->contains("sentences")) {
      a.sentences = line->at("sentences").get<std::vector<std::string>>();
    } else {
      a.sentences = split_text(line->at("text").get<std::string>());
    }
    out.push_back(std::move(a));
  }
  return out;
}

int gcf_build(Context& ctx, const std::string& input, const std::string& out_path,
              const std::string& parser_choice, const GcfConfig& config) {
  if (config.min_sentences < 3) throw UsageError("--min-sentences must be at least 3");
  if (config.mask_token.empty()) throw UsageError("--mask-token must not be empty");
  const auto articles = load_articles(input);
  auto parser = resolve_parser(ctx, parser_choice);

  struct Slot {
    GcfArticleResult result;
    std::string failure;
  };
  std::vector<Slot> slots(articles.size());
  parallel_for(articles.size(), ctx.jobs(), [&](std::size_t i) {
    Rng rng = make_rng(mix_seed(ctx.globals.seed, articles[i].id));
    try {
      slots[i].result = build_examples(articles[i].id, articles[i].sentences, *parser.impl, rng, config);
    } catch (const AlignmentError& e) {
      slots[i].failure = e.what();
    } catch (const ParseError& e) {
      slots[i].failure = e.what();
    }
  });

  std::vector<GcfExample> examples;
  std::size_t short_articles = 0, unmaskable = 0, too_long = 0, failed = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].failure.empty()) {
      ++failed;
      log::warning("article " + articles[i].id + " skipped: " + slots[i].failure);
      continue;
    }
    const auto& r = slots[i].result;
    short_articles += r.skipped_short_article ? 1 : 0;
    unmaskable += r.skipped_unmaskable;
    too_long += r.skipped_too_long;
    examples.insert(examples.end(), r.examples.begin(), r.examples.end());
  }

  auto out = open_output(out_path);
  FileHeader header{std::string(kGcfFormat), 1,
                    ctx.metadata(OrderedJson{{"parse", parser.description}})};
  const auto report = serialize_training(examples, out, config, header);
  for (const auto& r : report.rejected) log::warning(r);
  ctx.out << "articles " << articles.size() << ", examples " << report.written << ", rejected "
          << report.rejected.size() << ", short articles " << short_articles
          << ", unmaskable sentences " << unmaskable << ", long sentences " << too_long
          << ", failed articles " << failed << '\n';
  return kOk;
}

struct RewriteOptions {
  std::string input;
  std::string out;
  int k = 1;
  int n_fakes = 1;
  std::string mode = "bartfg";
  std::string filler;
  std::string parser;
  std::string completer;
  double prefix_ratio = 0.2;
  int max_retries = 5;
  int max_constituents = 3;
  int n_candidates = 3;
  std::string mask_token = std::string(kDefaultMaskToken);
};

int rewrite(Context& ctx, const RewriteOptions& o) {
  RewriteConfig config;
  config.k_iterations = o.k;
  config.max_retries = o.max_retries;
  config.max_constituents = o.max_constituents;
  config.n_candidates = o.n_candidates;
  config.mask_token = o.mask_token;
  try {
    config.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  if (o.n_fakes < 1) throw UsageError("--n-fakes must be at least 1");
  if (o.mode != "bartfg" && o.mode != "prefix") throw UsageError("--mode must be bartfg or prefix");
  if (!(o.prefix_ratio > 0.0 && o.prefix_ratio < 1.0)) {
    throw UsageError("--prefix-ratio must lie in (0, 1)");
  }

  const auto paragraphs = load_paragraphs(o.input);
  OrderedJson backends = OrderedJson::object();
  Resolved<Filler> filler;
  Resolved<Parser> parser;
  Resolved<Completer> completer;
  if (o.mode == "bartfg") {
    filler = resolve_filler(ctx, o.filler);
    parser = resolve_parser(ctx, o.parser);
    backends["fill"] = filler.description;
    backends["parse"] = parser.description;
  } else {
    std::vector<std::string> corpus;
    for (const auto& p : paragraphs) corpus.push_back(p.text);
    completer = resolve_completer(ctx, o.completer, corpus);
    backends["complete"] = completer.description;
  }

  const std::size_t runs = static_cast<std::size_t>(o.n_fakes);
  const std::size_t total = paragraphs.size() * runs;
  std::vector<OrderedJson> records(total);
  std::vector<int> failures(total, kOk);
  parallel_for(total, ctx.jobs(), [&](std::size_t i) {
    const Paragraph& p = paragraphs[i / runs];
    const std::size_t run = i % runs;
    const std::uint64_t seed = mix_seed(mix_seed(ctx.globals.seed, p.id), run);
    OrderedJson rec;
    rec["source_id"] = p.id;
    rec["run"] = run;
    rec["seed"] = seed;
    rec["mode"] = o.mode;
    try {
      if (o.mode == "bartfg") {
        RewriteConfig c = config;
        c.seed = seed;
        Rng rng = make_rng(seed);
        auto result = rewrite_paragraph(p.text, *filler.impl, *parser.impl, c, rng);
        if (result.fake_text == p.text) {
          rec["error"] = "no constituent could be rewritten";
        } else {
          rec["fake"] = to_json(make_paragraph(result.fake_text, Provenance::model_fake(o.k)));
          OrderedJson traces = OrderedJson::array();
          for (const auto& t : result.traces) traces.push_back(to_json(t));
          rec["traces"] = std::move(traces);
        }
      } else {
        auto result = prefix_completion_rewrite(p.text, *completer.impl, o.prefix_ratio, seed);
        if (result.fake_text == p.text || text::trim(result.fake_text).empty()) {
          rec["error"] = "completion reproduced the original";
        } else {
          rec["fake"] = to_json(make_paragraph(result.fake_text, Provenance::prefix_fake()));
          rec["prefix_tokens"] = result.prefix_tokens;
          rec["warnings"] = result.warnings;
        }
      }
    } catch (const BackendError& e) {
      rec["error"] = e.what();
      failures[i] = kBackendFailure;
    } catch (const Error& e) {
      rec["error"] = e.what();
      failures[i] = kValidationFailure;
    }
    records[i] = std::move(rec);
  });

  auto out = open_output(o.out);
  write_line(out, header_json({std::string(kFakesFormat), 1, ctx.metadata(backends)}));
  std::size_t written = 0, skipped = 0;
  int code = kOk;
  for (std::size_t i = 0; i < total; ++i) {
    write_line(out, records[i]);
    if (records[i].contains("error")) {
      ++skipped;
      log::warning("paragraph " + records[i]["source_id"].get<std::string>() + " run " +
                   std::to_string(i % runs) + ": " + records[i]["error"].get<std::string>());
    } else {
      ++written;
    }
    code = std::max(code, failures[i]);
  }
  ctx.out << "paragraphs " << paragraphs.size() << ", fakes " << written << ", without fake "
          << skipped << '\n';
  return code;
}

// Fakes grouped by source paragraph id, in file order.
std::map<std::string, std::vector<Paragraph>> load_fakes(const std::vector<std::string>& files) {
  std::map<std::string, std::vector<Paragraph>> out;
  for (const auto& file : files) {
    std::istringstream in(read_file(file));
    JsonlReader reader(in);
    while (auto line = reader.next()) {
      if (auto header = parse_header(*line)) {
        if (header->format != kFakesFormat) {
          throw FormatError(file + ": expected a " + std::string(kFakesFormat) + " file", 0);
        }
        if (header->schema_version != 1) {
          throw VersionError(file + ": unsupported version " + std::to_string(header->schema_version));
        }
        continue;
      }
      if (line->contains("error") || !line->contains("fake")) continue;
      out[line->at("source_id").get<std::string>()].push_back(paragraph_from_json(line->at("fake")));
    }
  }
  return out;
}

struct AssembleOptions {
  std::string real;
  std::vector<std::string> fakes;
  std::string out;
  bool random_ctx = false;
  std::size_t n_random = 4;
};

int assemble(Context& ctx, const AssembleOptions& o) {
  if (!o.random_ctx && o.fakes.empty()) throw UsageError("pass --fakes, or --random-ctx");
  const auto squad = load_squad(o.real);
  const auto fakes = load_fakes(o.fakes);

  std::vector<Paragraph> pool;
  for (const auto& sp : squad) pool.push_back(sp.paragraph);
  if (o.random_ctx && (o.n_random < 1 || o.n_random >= pool.size())) {
    throw UsageError("--n-random must be between 1 and the number of paragraphs minus one");
  }

  auto out = open_output(o.out);
  DatasetWriter writer(out, ctx.metadata());
  std::size_t samples = 0, without_fakes = 0;
  for (const auto& sp : squad) {
    std::vector<Paragraph> contexts;
    if (o.random_ctx) {
      contexts = sample_random_contexts(pool, o.n_random, sp.paragraph.id, ctx.globals.seed);
    } else {
      auto it = fakes.find(sp.paragraph.id);
      if (it != fakes.end()) {
        std::set<std::string> seen{sp.paragraph.id};
        for (const auto& f : it->second) {
          if (seen.insert(f.id).second) contexts.push_back(f);
        }
      }
      if (contexts.empty()) {
        ++without_fakes;
        continue;
      }
    }
    for (const auto& s : assemble_contra(sp.paragraph, contexts, sp.qas, ctx.globals.seed)) {
      writer.write(s);
      ++samples;
    }
  }
  ctx.out << "paragraphs " << squad.size() << ", samples " << samples
          << ", paragraphs without fakes " << without_fakes << '\n';
  return kOk;
}

}  // namespace

void add_data_commands(CLI::App& app, Context&, Command& chosen) {
  {
    auto* sub = app.add_subcommand("gcf-build", "Build gap constituency filling training data");
    auto input = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto parser = std::make_shared<std::string>();
    auto config = std::make_shared<GcfConfig>();
    sub->add_option("--input", *input, "Articles: JSONL {id, text|sentences} or SQuAD JSON")
        ->required();
    sub->add_option("--out", *out, "Training JSONL")->required();
    sub->add_option("--parser,--parser-endpoint", *parser, "shallow or a parser URL");
    sub->add_option("--min-sentences", config->min_sentences)->capture_default_str();
    sub->add_option("--max-sentence-tokens", config->max_sentence_tokens)->capture_default_str();
    sub->add_option("--mask-token", config->mask_token)->capture_default_str();
    sub->callback([&chosen, input, out, parser, config] {
      chosen = [=](Context& c) { return gcf_build(c, *input, *out, *parser, *config); };
    });
  }
  {
    auto* sub = app.add_subcommand("rewrite", "Generate fake contexts");
    auto o = std::make_shared<RewriteOptions>();
    sub->add_option("--input", o->input, "Paragraphs: SQuAD JSON or JSONL {text}")->required();
    sub->add_option("--out", o->out, "Fakes JSONL")->required();
    sub->add_option("--k", o->k, "Mask-and-fill iterations per sentence")->capture_default_str();
    sub->add_option("--n-fakes", o->n_fakes, "Independent fakes per paragraph")->capture_default_str();
    sub->add_option("--mode", o->mode, "bartfg or prefix")->capture_default_str();
    sub->add_option("--filler", o->filler, "gazetteer:<table.json> or a filler URL");
    sub->add_option("--parser", o->parser, "shallow or a parser URL");
    sub->add_option("--completer", o->completer, "markov or a completer URL");
    sub->add_option("--prefix-ratio", o->prefix_ratio)->capture_default_str();
    sub->add_option("--max-retries", o->max_retries)->capture_default_str();
    sub->add_option("--max-constituents", o->max_constituents)->capture_default_str();
    sub->add_option("--n-candidates", o->n_candidates)->capture_default_str();
    sub->add_option("--mask-token", o->mask_token)->capture_default_str();
    sub->callback([&chosen, o] { chosen = [o](Context& c) { return rewrite(c, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("assemble", "Assemble the contradicting-context dataset");
    auto o = std::make_shared<AssembleOptions>();
    sub->add_option("--real", o->real, "SQuAD JSON")->required();
    sub->add_option("--fakes", o->fakes, "Fakes JSONL files")->expected(1, -1);
    sub->add_option("--out", o->out, "Dataset JSONL")->required();
    sub->add_flag("--random-ctx", o->random_ctx, "Use random real paragraphs instead of fakes");
    sub->add_option("--n-random", o->n_random, "Random paragraphs per sample")->capture_default_str();
    sub->callback([&chosen, o] { chosen = [o](Context& c) { return assemble(c, *o); }; });
  }
}

}  // namespace contraforge::cli
