#pragma once

// HTTP front ends: the backend wire protocol over in-process baselines, and
// the annotation task service.

#include <memory>
#include <string>
#include <thread>

#include "contraforge/annotation.hpp"
#include "contraforge/backend.hpp"

namespace httplib {
class Server;
}

namespace contraforge {

// Implementations behind each route; a null member makes the route answer
// 501.
struct BackendSet {
  Parser* parser = nullptr;
  Filler* filler = nullptr;
  Reader* reader = nullptr;
  Detector* detector = nullptr;
  Completer* completer = nullptr;
};

void mount_backend_routes(httplib::Server& server, const BackendSet& backends);
void mount_annotation_routes(httplib::Server& server, AnnotationStore& store);

// An httplib server listening on a background thread. Port 0 picks a free
// port.
class BackgroundServer {
 public:
  BackgroundServer();
  ~BackgroundServer();
  BackgroundServer(const BackgroundServer&) = delete;
  BackgroundServer& operator=(const BackgroundServer&) = delete;

  httplib::Server& server() { return *server_; }
  // Binds and starts serving; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string url() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = -1;
};

}  // namespace contraforge
