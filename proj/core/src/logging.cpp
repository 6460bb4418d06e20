#include "mms/logging.hpp"

#include <atomic>
#include <cstdio>

#include "mms/errors.hpp"

namespace mms {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_coordinate: return "InvalidCoordinate";
    case Errc::datum_unset: return "DatumUnset";
    case Errc::no_fix: return "NoFix";
    case Errc::angle_near_pi: return "AngleNearPi";
    case Errc::unknown_scenario: return "UnknownScenario";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::bad_dt: return "BadDt";
    case Errc::invalid_delta: return "InvalidDelta";
    case Errc::field_too_weak: return "FieldTooWeak";
    case Errc::singular_innovation_cov: return "SingularInnovationCov";
    case Errc::non_monotonic_time: return "NonMonotonicTime";
    case Errc::degenerate_geometry: return "DegenerateGeometry";
    case Errc::unsorted_log: return "UnsortedLog";
    case Errc::empty_log: return "EmptyLog";
    case Errc::format_error: return "FormatError";
    case Errc::io_error: return "IoError";
    case Errc::non_finite_point: return "NonFinitePoint";
    case Errc::disconnected_graph: return "DisconnectedGraph";
    case Errc::singular_hessian: return "SingularHessian";
    case Errc::no_overlap: return "NoOverlap";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

namespace {

std::atomic<LogLevel> g_level{LogLevel::warn};

const char* level_tag(LogLevel lvl) {
  switch (lvl) {
    case LogLevel::debug: return "DEBUG";
    case LogLevel::info: return "INFO";
    case LogLevel::warn: return "WARN";
    case LogLevel::error: return "ERROR";
    case LogLevel::off: return "OFF";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return g_level.load(std::memory_order_relaxed); }

void set_log_level(LogLevel lvl) { g_level.store(lvl, std::memory_order_relaxed); }

bool parse_log_level(const std::string& name, LogLevel& out) {
  if (name == "debug") out = LogLevel::debug;
  else if (name == "info") out = LogLevel::info;
  else if (name == "warn") out = LogLevel::warn;
  else if (name == "error") out = LogLevel::error;
  else if (name == "off") out = LogLevel::off;
  else return false;
  return true;
}

namespace detail {

void log_emit(LogLevel lvl, const std::string& msg) {
  // Diagnostics go to stderr so piped stdout (CSV/PLY dumps) stays clean.
  std::fprintf(stderr, "[%s] %s\n", level_tag(lvl), msg.c_str());
}

}  // namespace detail

}  // namespace mms
