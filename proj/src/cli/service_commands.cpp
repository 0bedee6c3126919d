#include "common.hpp"
#include "contraforge/annotation.hpp"
#include "contraforge/baselines.hpp"
#include "contraforge/servers.hpp"
#include "httplib.h"

namespace contraforge::cli {

namespace {

int listen(Context& ctx, httplib::Server& server, const std::string& host, int port) {
  const int bound = port == 0 ? server.bind_to_any_port(host)
                              : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw UsageError("cannot bind " + host + ":" + std::to_string(port));
  ctx.out << "listening on http://" << host << ':' << bound << std::endl;
  server.listen_after_bind();
  return kOk;
}

struct ServeBaselinesOptions {
  std::string host = "127.0.0.1";
  int port = 8081;
  std::string gazetteer;
  std::string detector = "oracle";
  std::string corpus;
};

int serve_baselines(Context& ctx, const ServeBaselinesOptions& o) {
  ShallowParser parser;
  OverlapReader reader;
  std::unique_ptr<GazetteerFiller> filler;
  if (!o.gazetteer.empty()) filler = std::make_unique<GazetteerFiller>(GazetteerTable::load(o.gazetteer));
  auto detector = resolve_detector(ctx, o.detector, false);
  std::vector<std::string> corpus;
  if (!o.corpus.empty()) {
    for (const auto& p : load_paragraphs(o.corpus)) corpus.push_back(p.text);
  }
  MarkovCompleter completer(corpus);

  httplib::Server server;
  mount_backend_routes(server, {&parser, filler.get(), &reader, detector.impl.get(), &completer});
  return listen(ctx, server, o.host, o.port);
}

int serve_annotation(Context& ctx, const std::string& host, int port, const std::string& store_dir,
                     long lease_seconds) {
  if (lease_seconds < 1) throw UsageError("--lease-timeout must be at least 1 second");
  AnnotationStore store(store_dir, std::chrono::seconds(lease_seconds));
  httplib::Server server;
  mount_annotation_routes(server, store);
  return listen(ctx, server, host, port);
}

int export_annotations(Context& ctx, const std::string& store_dir, const std::string& out_path,
                       bool include_unreviewed) {
  if (!std::filesystem::is_directory(store_dir)) throw UsageError("no store at " + store_dir);
  AnnotationStore store(store_dir);
  const auto fakes = store.export_fakes(include_unreviewed);
  auto out = open_output(out_path);
  write_line(out, header_json({std::string(kFakesFormat), 1, ctx.metadata()}));
  for (const auto& [original, fake] : fakes) {
    OrderedJson rec;
    rec["source_id"] = original.id;
    rec["mode"] = "human";
    rec["fake"] = to_json(fake);
    write_line(out, rec);
  }
  ctx.out << "exported " << fakes.size() << " fakes\n";
  return kOk;
}

}  // namespace

void add_service_commands(CLI::App& app, Context&, Command& chosen) {
  {
    auto* sub = app.add_subcommand("serve-baselines", "Serve the baseline backends over HTTP");
    auto o = std::make_shared<ServeBaselinesOptions>();
    sub->add_option("--host", o->host)->capture_default_str();
    sub->add_option("--port", o->port, "0 picks a free port")->capture_default_str();
    sub->add_option("--gazetteer", o->gazetteer, "Gazetteer table for /fill");
    sub->add_option("--detector", o->detector, "oracle or constant:<v>")->capture_default_str();
    sub->add_option("--corpus", o->corpus, "Paragraphs for the /complete bigram model");
    sub->callback([&chosen, o] { chosen = [o](Context& c) { return serve_baselines(c, *o); }; });
  }
  {
    auto* sub = app.add_subcommand("serve-annotation", "Serve annotation tasks over HTTP");
    auto host = std::make_shared<std::string>("127.0.0.1");
    auto port = std::make_shared<int>(8080);
    auto store = std::make_shared<std::string>();
    auto lease = std::make_shared<long>(1800);
    sub->add_option("--host", *host)->capture_default_str();
    sub->add_option("--port", *port, "0 picks a free port")->capture_default_str();
    sub->add_option("--store", *store, "Journal directory")->required();
    sub->add_option("--lease-timeout", *lease, "Seconds")->capture_default_str();
    sub->callback([&chosen, host, port, store, lease] {
      chosen = [=](Context& c) { return serve_annotation(c, *host, *port, *store, *lease); };
    });
  }
  {
    auto* sub = app.add_subcommand("export-annotations", "Write reviewed human fakes as JSONL");
    auto store = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto unreviewed = std::make_shared<bool>(false);
    sub->add_option("--store", *store, "Journal directory")->required();
    sub->add_option("--out", *out, "Fakes JSONL")->required();
    sub->add_flag("--include-unreviewed", *unreviewed, "Also export submitted, unreviewed fakes");
    sub->callback([&chosen, store, out, unreviewed] {
      chosen = [=](Context& c) { return export_annotations(c, *store, *out, *unreviewed); };
    });
  }
}

}  // namespace contraforge::cli
