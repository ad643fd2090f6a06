#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace hyfed {

// Error taxonomy used at module boundaries. The CLI maps UsageError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Wire/protocol violations (forbidden fields, version mismatch, framing).
class WireError : public Error {
public:
    explicit WireError(const std::string& msg) : Error(msg) {}
};

// Retrieval backend failure (e.g. model service unreachable).
class BackendError : public Error {
public:
    explicit BackendError(const std::string& msg) : Error(msg) {}
};

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Err = 3, Off = 4 };

namespace log_detail {
inline LogLevel& level() {
    static LogLevel lvl = LogLevel::Warn;
    return lvl;
}
}  // namespace log_detail

inline void set_log_level(LogLevel lvl) { log_detail::level() = lvl; }

inline LogLevel parse_log_level(const std::string& s) {
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    if (s == "warn") return LogLevel::Warn;
    if (s == "error") return LogLevel::Err;
    if (s == "off") return LogLevel::Off;
    throw UsageError("unknown log level: " + s);
}

template <typename... Args>
void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
    if (lvl < log_detail::level()) return;
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

#define HYFED_LOG_DEBUG(...) ::hyfed::log_at(::hyfed::LogLevel::Debug, "debug", __VA_ARGS__)
#define HYFED_LOG_INFO(...) ::hyfed::log_at(::hyfed::LogLevel::Info, "info", __VA_ARGS__)
#define HYFED_LOG_WARN(...) ::hyfed::log_at(::hyfed::LogLevel::Warn, "warn", __VA_ARGS__)
#define HYFED_LOG_ERROR(...) ::hyfed::log_at(::hyfed::LogLevel::Err, "error", __VA_ARGS__)

}  // namespace hyfed
