#include "common.hpp"

#include <exception>
#include <iostream>

#include "mms/logging.hpp"

namespace mms::cli {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::io_error:
      return kExitIo;
    case Errc::config_error:
    case Errc::unknown_scenario:
    case Errc::invalid_coordinate:
    case Errc::datum_unset:
    case Errc::out_of_range:
      return kExitConfig;
    case Errc::unsorted_log:
    case Errc::empty_log:
    case Errc::format_error:
    case Errc::non_monotonic_time:
      return kExitBadLog;
    case Errc::disconnected_graph:
    case Errc::singular_hessian:
      return kExitGraph;
    default:
      return kExitIo;
  }
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";  // what() carries the error name
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

RunConfig base_config(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  return load_run_config(config_path);
}

}  // namespace mms::cli
