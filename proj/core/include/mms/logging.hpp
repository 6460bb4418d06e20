#pragma once

#include <sstream>
#include <string>

namespace mms {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Process-wide log threshold. Defaults to warn; the CLI raises or lowers it
/// from the MMS_LOG_LEVEL environment variable (debug|info|warn|error|off).
LogLevel log_level();
void set_log_level(LogLevel lvl);

/// Parses a level name; returns false (leaving out untouched) on junk input.
bool parse_log_level(const std::string& name, LogLevel& out);

namespace detail {
void log_emit(LogLevel lvl, const std::string& msg);
}

}  // namespace mms

#define MMS_LOG(lvl, stream_expr)                            \
  do {                                                       \
    if (static_cast<int>(lvl) >= static_cast<int>(::mms::log_level())) { \
      std::ostringstream mms_log_oss_;                       \
      mms_log_oss_ << stream_expr;                           \
      ::mms::detail::log_emit(lvl, mms_log_oss_.str());      \
    }                                                        \
  } while (0)

#define MMS_DEBUG(stream_expr) MMS_LOG(::mms::LogLevel::debug, stream_expr)
#define MMS_INFO(stream_expr) MMS_LOG(::mms::LogLevel::info, stream_expr)
#define MMS_WARN(stream_expr) MMS_LOG(::mms::LogLevel::warn, stream_expr)
#define MMS_ERROR(stream_expr) MMS_LOG(::mms::LogLevel::error, stream_expr)
