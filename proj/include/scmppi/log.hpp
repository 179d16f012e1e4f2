#pragma once

#include <cstdio>
#include <string>

namespace scmppi::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from the SCMPPI_LOG environment variable
// (error|warn|info|debug), default warn.
Level threshold();
void set_threshold(Level level);

void write(Level level, const std::string& msg);

inline void error(const std::string& msg) { write(Level::Error, msg); }
inline void warn(const std::string& msg) { write(Level::Warn, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace scmppi::log
