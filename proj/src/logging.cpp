#include "heterograph/logging.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace heterograph::log {

namespace {

Level parse_env() {
    const char* env = std::getenv("HETEROGRAPH_LOG");
    if (!env) return Level::Warn;
    std::string v(env);
    if (v == "error") return Level::Error;
    if (v == "warn") return Level::Warn;
    if (v == "info") return Level::Info;
    if (v == "debug") return Level::Debug;
    return Level::Warn;
}

Level g_threshold = parse_env();
std::mutex g_mutex;

const char* level_name(Level level) {
    switch (level) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "?";
}

}  // namespace

Level threshold() { return g_threshold; }

void set_threshold(Level level) { g_threshold = level; }

void write(Level level, const std::string& msg) {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[%s] %s\n", level_name(level), msg.c_str());
}

}  // namespace heterograph::log
