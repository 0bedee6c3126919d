#include "contraforge/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace contraforge::log {

namespace {
std::atomic<Level> current{Level::warning};
std::mutex sink_mutex;

const char* name(Level l) {
  switch (l) {
    case Level::debug:
      return "debug";
    case Level::info:
      return "info";
    case Level::warning:
      return "warning";
    case Level::error:
      return "error";
    case Level::quiet:
      break;
  }
  return "";
}
}  // namespace

void set_level(Level l) { current = l; }
Level level() { return current; }

void write(Level l, std::string_view message) {
  if (l < current || l == Level::quiet) return;
  std::lock_guard lock(sink_mutex);
  std::cerr << '[' << name(l) << "] " << message << '\n';
}

}  // namespace contraforge::log
