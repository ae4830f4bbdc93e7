#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace idselect::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

// Verbosity comes from IDSELECT_LOG (quiet|info|debug), default info.
// All diagnostics go to stderr; stdout stays clean for command output.
inline Level level() {
    static Level lv = [] {
        const char* env = std::getenv("IDSELECT_LOG");
        if (!env) return Level::Info;
        if (std::strcmp(env, "quiet") == 0) return Level::Quiet;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        return Level::Info;
    }();
    return lv;
}

template <typename... Args>
void info(const char* fmt, Args... args) {
    if (level() >= Level::Info) {
        std::fprintf(stderr, fmt, args...);
        std::fputc('\n', stderr);
    }
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
    if (level() >= Level::Debug) {
        std::fprintf(stderr, fmt, args...);
        std::fputc('\n', stderr);
    }
}

template <typename... Args>
void error(const char* fmt, Args... args) {
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

} // namespace idselect::log
