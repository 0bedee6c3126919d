#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "contraforge/baselines.hpp"
#include "contraforge/log.hpp"
#include "contraforge/parallel.hpp"

namespace contraforge::cli {

namespace {

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

// Options that name output locations or only affect scheduling.
const std::set<std::string> kUnrecorded = {"out", "report", "per-sample", "jobs", "log-level",
                                           "help", "version"};

void record_options(const CLI::App& app, OrderedJson& flags) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (kUnrecorded.count(name)) continue;
    if (opt->get_expected_max() == 0) {
      flags[name] = opt->count() > 0;
      continue;
    }
    if (opt->count() == 0) {
      const std::string d = opt->get_default_str();
      flags[name] = d.empty() ? OrderedJson(nullptr) : OrderedJson(d);
    } else if (opt->get_expected_max() > 1) {
      flags[name] = opt->results();
    } else {
      flags[name] = opt->results().back();
    }
  }
}

log::Level parse_level(const std::string& s) {
  if (s == "debug") return log::Level::debug;
  if (s == "info") return log::Level::info;
  if (s == "warning") return log::Level::warning;
  if (s == "error") return log::Level::error;
  if (s == "quiet") return log::Level::quiet;
  throw UsageError("unknown log level '" + s + "'");
}

}  // namespace

std::size_t Context::jobs() const { return globals.jobs == 0 ? default_jobs() : globals.jobs; }

BackendConfig Context::backend_config() const {
  BackendConfig config;
  if (!globals.config_file.empty()) {
    Json j;
    try {
      j = Json::parse(read_file(globals.config_file));
    } catch (const Json::parse_error& e) {
      throw FormatError(globals.config_file + ": " + e.what(), e.byte);
    }
    config.merge_json(j.contains("backends") ? j["backends"] : j);
  }
  config.merge_env(getenv);
  const std::pair<Capability, const std::string*> urls[] = {
      {Capability::parse, &globals.parse_url},   {Capability::fill, &globals.fill_url},
      {Capability::read, &globals.read_url},     {Capability::detect, &globals.detect_url},
      {Capability::complete, &globals.complete_url}};
  for (const auto& [cap, url] : urls) {
    if (!url->empty()) config.set_url(cap, *url);
  }
  if (globals.timeout_ms >= 0) config.timeout = std::chrono::milliseconds(globals.timeout_ms);
  if (globals.retries >= 0) config.retries = globals.retries;
  if (globals.max_in_flight >= 0) config.max_in_flight = static_cast<std::size_t>(globals.max_in_flight);
  return config;
}

OrderedJson Context::metadata(const OrderedJson& backends) const {
  OrderedJson meta;
  meta["tool"] = kToolName;
  meta["version"] = kToolVersion;
  meta["subcommand"] = sub->get_name();
  OrderedJson flags = OrderedJson::object();
  record_options(*app, flags);
  record_options(*sub, flags);
  meta["flags"] = std::move(flags);
  meta["seed"] = globals.seed;
  if (!backends.empty()) meta["backends"] = backends;
  return meta;
}

Resolved<Parser> resolve_parser(const Context& ctx, const std::string& choice) {
  std::string c = choice;
  if (c.empty()) {
    if (auto e = ctx.backend_config().endpoint(Capability::parse)) c = e->url;
  }
  if (c.empty() || c == "shallow") return {std::make_unique<ShallowParser>(), "shallow"};
  if (is_url(c)) {
    const auto e = ctx.backend_config().endpoint_at(Capability::parse, c);
    return {std::make_unique<RemoteParser>(e), c};
  }
  throw UsageError("unknown parser '" + c + "' (use shallow or a URL)");
}

Resolved<Filler> resolve_filler(const Context& ctx, const std::string& choice) {
  std::string c = choice;
  if (c.empty()) {
    if (auto e = ctx.backend_config().endpoint(Capability::fill)) c = e->url;
  }
  if (c.empty()) throw UsageError("no filler: pass --filler gazetteer:<table.json> or a URL");
  if (c.rfind("gazetteer:", 0) == 0) {
    const std::string path = c.substr(10);
    return {std::make_unique<GazetteerFiller>(GazetteerTable::load(path)), c};
  }
  if (is_url(c)) {
    const auto e = ctx.backend_config().endpoint_at(Capability::fill, c);
    return {std::make_unique<RemoteFiller>(e), c};
  }
  throw UsageError("unknown filler '" + c + "' (use gazetteer:<table.json> or a URL)");
}

Resolved<Reader> resolve_reader(const Context& ctx, const std::string& choice) {
  std::string c = choice;
  if (c.empty()) {
    if (auto e = ctx.backend_config().endpoint(Capability::read)) c = e->url;
  }
  if (c.empty() || c == "overlap") return {std::make_unique<OverlapReader>(), "overlap"};
  if (is_url(c)) {
    const auto e = ctx.backend_config().endpoint_at(Capability::read, c);
    return {std::make_unique<RemoteReader>(e), c};
  }
  throw UsageError("unknown reader '" + c + "' (use overlap or a URL)");
}

Resolved<Detector> resolve_detector(const Context& ctx, const std::string& choice,
                                    bool send_provenance) {
  std::string c = choice;
  if (c.empty()) {
    if (auto e = ctx.backend_config().endpoint(Capability::detect)) c = e->url;
  }
  if (c.empty()) return {nullptr, ""};
  if (c == "oracle") return {std::make_unique<OracleDetector>(), c};
  if (c.rfind("constant:", 0) == 0) {
    double v = 0.0;
    try {
      v = std::stod(c.substr(9));
    } catch (const std::exception&) {
      throw UsageError("bad constant detector value in '" + c + "'");
    }
    try {
      return {std::make_unique<ConstantDetector>(v), c};
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  }
  if (is_url(c)) {
    const auto e = ctx.backend_config().endpoint_at(Capability::detect, c);
    return {std::make_unique<RemoteDetector>(e, send_provenance), c};
  }
  throw UsageError("unknown detector '" + c + "' (use oracle, constant:<v> or a URL)");
}

Resolved<Completer> resolve_completer(const Context& ctx, const std::string& choice,
                                      const std::vector<std::string>& corpus) {
  std::string c = choice;
  if (c.empty()) {
    if (auto e = ctx.backend_config().endpoint(Capability::complete)) c = e->url;
  }
  if (c.empty() || c == "markov") return {std::make_unique<MarkovCompleter>(corpus), "markov"};
  if (is_url(c)) {
    const auto e = ctx.backend_config().endpoint_at(Capability::complete, c);
    return {std::make_unique<RemoteCompleter>(e), c};
  }
  throw UsageError("unknown completer '" + c + "' (use markov or a URL)");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

std::vector<Paragraph> load_paragraphs(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    // A single JSON document with "data" is SQuAD; anything else is JSONL.
    try {
      const Json doc = Json::parse(content);
      if (doc.is_object() && doc.contains("data")) {
        std::vector<Paragraph> out;
        for (auto& sp : parse_squad(content)) out.push_back(std::move(sp.paragraph));
        return out;
      }
    } catch (const Json::parse_error&) {
    }
  }
  std::istringstream in(content);
  JsonlReader reader(in);
  std::vector<Paragraph> out;
  while (auto line = reader.next()) {
    if (parse_header(*line)) continue;
    if (!line->contains("text")) {
      throw FormatError(path.string() + ": record without 'text' on line " +
                            std::to_string(reader.line_number()),
                        0);
    }
    out.push_back(make_paragraph(line->at("text").get<std::string>(), Provenance::real()));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Getenv& getenv) {
  CLI::App app{"Contradicting-context QA toolkit", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out, err, getenv, {}, &app, nullptr};
  Globals& g = ctx.globals;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--config-file", g.config_file, "JSON file with backend endpoints");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--log-level", g.log_level, "debug|info|warning|error|quiet")->capture_default_str();
  app.add_option("--parse-url", g.parse_url, "Parser endpoint");
  app.add_option("--fill-url", g.fill_url, "Filler endpoint");
  app.add_option("--read-url", g.read_url, "Reader endpoint");
  app.add_option("--detect-url", g.detect_url, "Detector endpoint");
  app.add_option("--complete-url", g.complete_url, "Completer endpoint");
  app.add_option("--timeout-ms", g.timeout_ms, "Backend request timeout");
  app.add_option("--retries", g.retries, "Backend retries after the first attempt");
  app.add_option("--max-in-flight", g.max_in_flight, "Open requests per endpoint");

  Command chosen;
  add_data_commands(app, ctx, chosen);
  add_eval_commands(app, ctx, chosen);
  add_service_commands(app, ctx, chosen);

  std::vector<std::string> argv_store;
  argv_store.emplace_back(kToolName);
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (CLI::App* sub : app.get_subcommands()) ctx.sub = sub;
  try {
    log::set_level(parse_level(g.log_level));
    return chosen(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BackendError& e) {
    err << "backend failure: " << e.what() << '\n';
    return kBackendFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr, [](const char* name) { return std::getenv(name); });
}

}  // namespace contraforge::cli
