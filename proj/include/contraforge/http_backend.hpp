#pragma once

// HTTP clients for the backend capabilities.

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>

#include "contraforge/backend.hpp"

namespace contraforge {

struct BackendEndpoint {
  Capability capability = Capability::parse;
  // Base URL ("http://host:port") or the full route URL.
  std::string url;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
  std::size_t max_in_flight = 8;
};

// Endpoint settings per capability. Layers, lowest first: defaults, config
// file, environment (CONTRAFORGE_<CAP>_URL, CONTRAFORGE_TIMEOUT_MS,
// CONTRAFORGE_RETRIES, CONTRAFORGE_MAX_IN_FLIGHT), command-line flags.
struct BackendConfig {
  std::map<Capability, BackendEndpoint> endpoints;
  std::optional<std::chrono::milliseconds> timeout;
  std::optional<int> retries;
  std::optional<std::size_t> max_in_flight;

  // {"timeout_ms": .., "retries": .., "max_in_flight": ..,
  //  "endpoints": {"parse": "http://..", ...}}
  void merge_json(const Json& j);
  using Getenv = std::function<const char*(const char*)>;
  void merge_env(const Getenv& getenv);
  void set_url(Capability c, std::string url);

  // Endpoint with the global settings applied, or nullopt when no URL is set.
  std::optional<BackendEndpoint> endpoint(Capability c) const;
  // Endpoint at an explicit URL, with the global settings applied.
  BackendEndpoint endpoint_at(Capability c, std::string url) const;
};

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_url(const std::string& url);

// POSTs JSON to one endpoint. Transport failures and 5xx responses are
// retried with exponential backoff; 4xx responses raise ProtocolError at
// once. Safe for concurrent use; at most max_in_flight requests are open.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(BackendEndpoint endpoint);
  ~HttpJsonClient();

  Json post(const OrderedJson& body) const;
  const BackendEndpoint& endpoint() const { return endpoint_; }
  // "<capability> <url>", used in error messages.
  const std::string& identity() const { return identity_; }

 private:
  BackendEndpoint endpoint_;
  std::string host_;
  std::string path_;
  std::string identity_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

class RemoteParser final : public Parser {
 public:
  explicit RemoteParser(BackendEndpoint e) : client_(std::move(e)) {}
  std::string parse(std::string_view sentence) override;

 private:
  HttpJsonClient client_;
};

// Drops candidates that contain the mask token, with a warning.
class RemoteFiller final : public Filler {
 public:
  explicit RemoteFiller(BackendEndpoint e) : client_(std::move(e)) {}
  std::vector<std::string> fill(const FillCall& call) override;

 private:
  HttpJsonClient client_;
};

// Checks that the returned span indexes the paragraph (ContractError if not).
class RemoteReader final : public Reader {
 public:
  explicit RemoteReader(BackendEndpoint e) : client_(std::move(e)) {}
  ScoredAnswer read(std::string_view question, std::string_view paragraph) override;

 private:
  HttpJsonClient client_;
};

class RemoteDetector final : public Detector {
 public:
  // With send_provenance the request carries the context's provenance, for
  // servers running an oracle detector.
  explicit RemoteDetector(BackendEndpoint e, bool send_provenance = false)
      : client_(std::move(e)), send_provenance_(send_provenance) {}
  double trust(const ContextView& context) override;
  bool needs_provenance() const override { return send_provenance_; }

 private:
  HttpJsonClient client_;
  bool send_provenance_;
};

class RemoteCompleter final : public Completer {
 public:
  explicit RemoteCompleter(BackendEndpoint e) : client_(std::move(e)) {}
  std::string complete(std::string_view prompt, std::size_t max_tokens,
                       std::uint64_t seed) override;

 private:
  HttpJsonClient client_;
};

}  // namespace contraforge
