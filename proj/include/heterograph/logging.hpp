#pragma once

#include <sstream>
#include <string>

namespace heterograph::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from the HETEROGRAPH_LOG environment variable
// (error|warn|info|debug); defaults to warn.
Level threshold();
void set_threshold(Level level);
void write(Level level, const std::string& msg);

template <typename... Args>
void emit(Level level, Args&&... args) {
    if (level > threshold()) return;
    std::ostringstream oss;
    (oss << ... << args);
    write(level, oss.str());
}

template <typename... Args> void error(Args&&... args) { emit(Level::Error, args...); }
template <typename... Args> void warn(Args&&... args) { emit(Level::Warn, args...); }
template <typename... Args> void info(Args&&... args) { emit(Level::Info, args...); }
template <typename... Args> void debug(Args&&... args) { emit(Level::Debug, args...); }

}  // namespace heterograph::log
