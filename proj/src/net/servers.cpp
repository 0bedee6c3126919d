#include "contraforge/servers.hpp"

#include <functional>

#include "contraforge/error.hpp"
#include "contraforge/log.hpp"
#include "contraforge/text.hpp"
#include "httplib.h"

namespace contraforge {

namespace {

using Handler = std::function<OrderedJson(const httplib::Request&, const Json&)>;

void send(httplib::Response& res, int status, const OrderedJson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message) {
  send(res, status, OrderedJson{{"error", message}});
}

// Runs a handler and maps library errors to HTTP statuses.
void dispatch(const httplib::Request& req, httplib::Response& res, const Handler& handler,
              bool parse_body, int ok_status = 200) {
  Json body = Json::object();
  if (parse_body) {
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      send_error(res, 422, std::string("request body is not JSON: ") + e.what());
      return;
    }
    if (!body.is_object()) {
      send_error(res, 422, "request body must be a JSON object");
      return;
    }
  }
  try {
    send(res, ok_status, handler(req, body));
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, e.what());
  } catch (const ContractError& e) {
    send_error(res, 422, e.what());
  } catch (const FormatError& e) {
    send_error(res, 422, e.what());
  } catch (const Json::exception& e) {
    send_error(res, 422, std::string("invalid request: ") + e.what());
  } catch (const std::exception& e) {
    log::error(req.path + ": " + e.what());
    send_error(res, 500, e.what());
  }
}

void post_json(httplib::Server& server, const std::string& pattern, Handler handler,
               int ok_status = 200) {
  server.Post(pattern, [handler = std::move(handler), ok_status](const httplib::Request& req,
                                                                 httplib::Response& res) {
    dispatch(req, res, handler, true, ok_status);
  });
}

void get_json(httplib::Server& server, const std::string& pattern, Handler handler) {
  server.Get(pattern, [handler = std::move(handler)](const httplib::Request& req,
                                                     httplib::Response& res) {
    dispatch(req, res, handler, false);
  });
}

void unavailable(httplib::Server& server, Capability c) {
  server.Post(route_for(c), [c](const httplib::Request&, httplib::Response& res) {
    send_error(res, 501, std::string(to_string(c)) + " is not configured on this server");
  });
}

std::string required_text(const Json& body, const char* name) {
  std::string v = body.at(name).get<std::string>();
  if (text::trim(v).empty()) throw ContractError(std::string("'") + name + "' must not be blank");
  return v;
}

}  // namespace

void mount_backend_routes(httplib::Server& server, const BackendSet& b) {
  if (b.parser) {
    post_json(server, "/parse", [p = b.parser](const auto&, const Json& body) {
      return wire::parse_response(p->parse(required_text(body, "sentence")));
    });
  } else {
    unavailable(server, Capability::parse);
  }

  if (b.filler) {
    post_json(server, "/fill", [f = b.filler](const auto&, const Json& body) {
      const FillCall call = wire::fill_call_from(body);
      return wire::fill_response(f->fill(call));
    });
  } else {
    unavailable(server, Capability::fill);
  }

  if (b.reader) {
    post_json(server, "/read", [r = b.reader](const auto&, const Json& body) {
      const std::string question = required_text(body, "question");
      const std::string paragraph = required_text(body, "paragraph");
      return wire::read_response(r->read(question, paragraph));
    });
  } else {
    unavailable(server, Capability::read);
  }

  if (b.detector) {
    post_json(server, "/detect", [d = b.detector](const auto&, const Json& body) {
      const std::string paragraph = required_text(body, "paragraph");
      ContextView view{paragraph, std::nullopt};
      if (body.contains("provenance") && !body["provenance"].is_null()) {
        view.provenance =
            Provenance{provenance_kind_from_string(body["provenance"].get<std::string>()), 0};
      }
      if (d->needs_provenance() && !view.provenance) {
        throw ContractError("this detector needs the 'provenance' field");
      }
      return wire::detect_response(d->trust(view));
    });
  } else {
    unavailable(server, Capability::detect);
  }

  if (b.completer) {
    post_json(server, "/complete", [c = b.completer](const auto&, const Json& body) {
      const std::string prompt = body.at("prompt").get<std::string>();
      const auto max_tokens = body.value("max_tokens", std::size_t{50});
      const auto seed = body.value("seed", std::uint64_t{0});
      return wire::complete_response(c->complete(prompt, max_tokens, seed));
    });
  } else {
    unavailable(server, Capability::complete);
  }
}

void mount_annotation_routes(httplib::Server& server, AnnotationStore& store) {
  post_json(
      server, "/tasks",
      [&store](const auto&, const Json& body) {
        std::vector<Paragraph> paragraphs;
        for (const auto& p : body.at("paragraphs")) {
          const std::string t = p.is_string() ? p.get<std::string>() : p.at("text").get<std::string>();
          paragraphs.push_back(make_paragraph(t, Provenance::real()));
        }
        if (paragraphs.empty()) throw ContractError("'paragraphs' must not be empty");
        OrderedJson out;
        out["tasks"] = OrderedJson::array();
        for (const auto& t : store.create_batch(paragraphs)) out["tasks"].push_back(to_json(t));
        return out;
      },
      201);

  get_json(server, "/tasks/next", [&store](const httplib::Request& req, const Json&) {
    const std::string annotator = req.get_param_value("annotator");
    if (annotator.empty()) throw ContractError("query parameter 'annotator' is required");
    auto task = store.next_task(annotator);
    return OrderedJson{{"task", task ? to_json(*task) : OrderedJson(nullptr)}};
  });

  get_json(server, "/tasks", [&store](const auto&, const Json&) {
    OrderedJson out;
    out["tasks"] = OrderedJson::array();
    for (const auto& t : store.tasks()) out["tasks"].push_back(to_json(t));
    return out;
  });

  get_json(server, R"(/tasks/([^/]+))", [&store](const httplib::Request& req, const Json&) {
    return to_json(store.get_task(req.matches[1]));
  });

  post_json(server, R"(/tasks/([^/]+)/validate)",
            [&store](const httplib::Request& req, const Json& body) {
              return to_json(store.validate(req.matches[1], body.at("modified").get<std::string>()));
            });

  post_json(server, R"(/tasks/([^/]+)/submit)",
            [&store](const httplib::Request& req, const Json& body) {
              const std::string id = req.matches[1];
              const auto outcome = store.submit(id, body.at("modified").get<std::string>(),
                                                body.at("annotator").get<std::string>());
              OrderedJson out;
              out["status"] = outcome.accepted ? "accepted" : "rejected";
              out["validation"] = to_json(outcome.validation);
              out["task"] = to_json(store.get_task(id));
              return out;
            });

  post_json(server, R"(/tasks/([^/]+)/review)",
            [&store](const httplib::Request& req, const Json& body) {
              return to_json(store.review(req.matches[1], body.at("accept").get<bool>()));
            });
}

BackgroundServer::BackgroundServer() : server_(std::make_unique<httplib::Server>()) {}

BackgroundServer::~BackgroundServer() { stop(); }

int BackgroundServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void BackgroundServer::stop() {
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

std::string BackgroundServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace contraforge
