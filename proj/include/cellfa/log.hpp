#pragma once

#include <string>

namespace cellfa {

// Verbosity from the CELLFA_LOG environment variable: quiet|info|debug.
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level();

void log_info(const std::string& message);
void log_debug(const std::string& message);
void log_warn(const std::string& message);  // printed unless quiet

}  // namespace cellfa
