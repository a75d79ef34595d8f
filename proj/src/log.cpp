#include "cellfa/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace cellfa {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("CELLFA_LOG");
    if (!env) return LogLevel::Info;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::Info) std::fprintf(stderr, "[cellfa] %s\n", message.c_str());
}

void log_debug(const std::string& message) {
  if (log_level() >= LogLevel::Debug)
    std::fprintf(stderr, "[cellfa:debug] %s\n", message.c_str());
}

void log_warn(const std::string& message) {
  if (log_level() >= LogLevel::Info)
    std::fprintf(stderr, "[cellfa:warn] %s\n", message.c_str());
}

}  // namespace cellfa
