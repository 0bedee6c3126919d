#include "contraforge/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include "contraforge/error.hpp"
#include "contraforge/log.hpp"
#include "httplib.h"

namespace contraforge {

namespace {

constexpr Capability kAll[] = {Capability::parse, Capability::fill, Capability::read,
                               Capability::detect, Capability::complete};

std::string env_name(Capability c) {
  std::string name = "CONTRAFORGE_";
  for (char ch : to_string(c)) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name + "_URL";
}

long parse_long(const char* value, const char* name) {
  char* end = nullptr;
  const long v = std::strtol(value, &end, 10);
  if (end == value || *end != '\0' || v < 0) {
    throw ContractError(std::string(name) + " must be a non-negative integer");
  }
  return v;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

void BackendConfig::merge_json(const Json& j) {
  if (!j.is_object()) throw ContractError("backend config must be a JSON object");
  if (j.contains("timeout_ms")) timeout = std::chrono::milliseconds(j["timeout_ms"].get<long>());
  if (j.contains("retries")) retries = j["retries"].get<int>();
  if (j.contains("max_in_flight")) max_in_flight = j["max_in_flight"].get<std::size_t>();
  if (j.contains("endpoints")) {
    for (const auto& [name, url] : j["endpoints"].items()) {
      set_url(capability_from_string(name), url.get<std::string>());
    }
  }
}

void BackendConfig::merge_env(const Getenv& getenv) {
  for (Capability c : kAll) {
    const std::string name = env_name(c);
    if (const char* v = getenv(name.c_str()); v && *v) set_url(c, v);
  }
  if (const char* v = getenv("CONTRAFORGE_TIMEOUT_MS"); v && *v) {
    timeout = std::chrono::milliseconds(parse_long(v, "CONTRAFORGE_TIMEOUT_MS"));
  }
  if (const char* v = getenv("CONTRAFORGE_RETRIES"); v && *v) {
    retries = static_cast<int>(parse_long(v, "CONTRAFORGE_RETRIES"));
  }
  if (const char* v = getenv("CONTRAFORGE_MAX_IN_FLIGHT"); v && *v) {
    max_in_flight = static_cast<std::size_t>(parse_long(v, "CONTRAFORGE_MAX_IN_FLIGHT"));
  }
}

void BackendConfig::set_url(Capability c, std::string url) {
  BackendEndpoint& e = endpoints[c];
  e.capability = c;
  e.url = std::move(url);
}

std::optional<BackendEndpoint> BackendConfig::endpoint(Capability c) const {
  auto it = endpoints.find(c);
  if (it == endpoints.end() || it->second.url.empty()) return std::nullopt;
  BackendEndpoint e = it->second;
  if (timeout) e.timeout = *timeout;
  if (retries) e.retries = *retries;
  if (max_in_flight) e.max_in_flight = *max_in_flight;
  return e;
}

BackendEndpoint BackendConfig::endpoint_at(Capability c, std::string url) const {
  BackendEndpoint e;
  e.capability = c;
  e.url = std::move(url);
  if (timeout) e.timeout = *timeout;
  if (retries) e.retries = *retries;
  if (max_in_flight) e.max_in_flight = *max_in_flight;
  return e;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ContractError("backend URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

HttpJsonClient::HttpJsonClient(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.retries < 0) throw ContractError("retries must be >= 0");
  if (endpoint_.max_in_flight < 1 || endpoint_.max_in_flight > 1024) {
    throw ContractError("max_in_flight must be in [1, 1024]");
  }
  auto [host, prefix] = split_url(endpoint_.url);
  const std::string route = route_for(endpoint_.capability);
  host_ = std::move(host);
  path_ = ends_with(prefix, route) ? prefix : prefix + route;
  identity_ = std::string(to_string(endpoint_.capability)) + " " + host_ + path_;
  slots_ = std::make_unique<std::counting_semaphore<1024>>(
      static_cast<std::ptrdiff_t>(endpoint_.max_in_flight));
}

HttpJsonClient::~HttpJsonClient() = default;

Json HttpJsonClient::post(const OrderedJson& body) const {
  const std::string payload = body.dump();
  slots_->acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{*slots_};

  std::string last_error;
  auto backoff = endpoint_.backoff;
  for (int attempt = 0; attempt <= endpoint_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(host_);
    client.set_connection_timeout(endpoint_.timeout);
    client.set_read_timeout(endpoint_.timeout);
    client.set_write_timeout(endpoint_.timeout);
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 400 && res->status < 500) {
      throw ProtocolError(identity_, res->status, res->body);
    }
    if (res->status == 501) throw ProtocolError(identity_, res->status, res->body);
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    try {
      return Json::parse(res->body);
    } catch (const Json::parse_error& e) {
      throw BackendError(identity_, std::string("response is not JSON: ") + e.what());
    }
  }
  throw BackendError(identity_, "failed after " + std::to_string(endpoint_.retries + 1) +
                                    " attempts: " + last_error);
}

namespace {

template <typename T>
T field(const Json& j, const char* name, const std::string& identity) {
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception& e) {
    throw BackendError(identity, std::string("bad response field '") + name + "': " + e.what());
  }
}

}  // namespace

std::string RemoteParser::parse(std::string_view sentence) {
  return field<std::string>(client_.post(wire::parse_request(sentence)), "tree", client_.identity());
}

std::vector<std::string> RemoteFiller::fill(const FillCall& call) {
  const auto all = field<std::vector<std::string>>(client_.post(wire::fill_request(call)),
                                                   "candidates", client_.identity());
  std::vector<std::string> out;
  for (const auto& c : all) {
    if (c.find(call.mask_token) != std::string::npos) {
      log::warning(client_.identity() + ": dropped candidate containing the mask token");
      continue;
    }
    out.push_back(c);
    if (out.size() == static_cast<std::size_t>(call.n_candidates)) break;
  }
  return out;
}

ScoredAnswer RemoteReader::read(std::string_view question, std::string_view paragraph) {
  const Json res = client_.post(wire::read_request(question, paragraph));
  ScoredAnswer a;
  try {
    a = wire::answer_from(res);
  } catch (const Json::exception& e) {
    throw BackendError(client_.identity(), std::string("bad /read response: ") + e.what());
  }
  check_answer(a, paragraph);
  return a;
}

double RemoteDetector::trust(const ContextView& context) {
  ContextView view = context;
  if (!send_provenance_) view.provenance.reset();
  const double t = field<double>(client_.post(wire::detect_request(view)), "trust",
                                 client_.identity());
  if (!(t >= 0.0 && t <= 1.0)) throw ContractError(client_.identity() + ": trust outside [0, 1]");
  return t;
}

std::string RemoteCompleter::complete(std::string_view prompt, std::size_t max_tokens,
                                      std::uint64_t seed) {
  return field<std::string>(client_.post(wire::complete_request(prompt, max_tokens, seed)),
                            "continuation", client_.identity());
}

}  // namespace contraforge
