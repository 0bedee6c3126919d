#pragma once

#include <string_view>

namespace contraforge::log {

enum class Level { debug, info, warning, error, quiet };

void set_level(Level level);
Level level();

// Writes "[level] message" to stderr. Thread-safe.
void write(Level level, std::string_view message);

inline void info(std::string_view m) { write(Level::info, m); }
inline void warning(std::string_view m) { write(Level::warning, m); }
inline void error(std::string_view m) { write(Level::error, m); }

}  // namespace contraforge::log
