#pragma once

#include <stdexcept>
#include <string>

namespace mms {

/// Failure classes surfaced by the library. The CLI maps these onto its
/// exit-code table; library callers can switch on code() to recover.
enum class Errc {
  invalid_coordinate,
  datum_unset,
  no_fix,
  angle_near_pi,
  unknown_scenario,
  out_of_range,
  bad_dt,
  invalid_delta,
  field_too_weak,
  singular_innovation_cov,
  non_monotonic_time,
  degenerate_geometry,
  unsorted_log,
  empty_log,
  format_error,
  io_error,
  non_finite_point,
  disconnected_graph,
  singular_hessian,
  no_overlap,
  config_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace mms
