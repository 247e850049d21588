#include "rotsdr/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace rotsdr {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ROT_SDR_LOG");
    if (!env) return LogLevel::error;
    const std::string s(env);
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    return LogLevel::error;
  }();
  return level;
}

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void emit(LogLevel at, const char* tag, const std::string& msg) {
  if (log_level() < at) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::cerr << tag << msg << "\n";
}

}  // namespace

void log_error(const std::string& msg) { emit(LogLevel::error, "[error] ", msg); }
void log_info(const std::string& msg) { emit(LogLevel::info, "[info] ", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::debug, "[debug] ", msg); }

}  // namespace rotsdr
