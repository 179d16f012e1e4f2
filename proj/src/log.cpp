#include "scmppi/log.hpp"

#include <cstdlib>
#include <cstring>

namespace scmppi::log {

namespace {

Level parse_env() {
    const char* v = std::getenv("SCMPPI_LOG");
    if (v == nullptr) return Level::Warn;
    if (std::strcmp(v, "error") == 0) return Level::Error;
    if (std::strcmp(v, "warn") == 0) return Level::Warn;
    if (std::strcmp(v, "info") == 0) return Level::Info;
    if (std::strcmp(v, "debug") == 0) return Level::Debug;
    return Level::Warn;
}

Level& threshold_ref() {
    static Level level = parse_env();
    return level;
}

const char* tag(Level level) {
    switch (level) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

}  // namespace

Level threshold() { return threshold_ref(); }

void set_threshold(Level level) { threshold_ref() = level; }

void write(Level level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(threshold_ref())) return;
    std::fprintf(stderr, "[scmppi %s] %s\n", tag(level), msg.c_str());
}

}  // namespace scmppi::log
