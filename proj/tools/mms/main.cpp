#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "mms/logging.hpp"

int main(int argc, char** argv) {
  if (const char* env = std::getenv("MMS_LOG_LEVEL")) {
    mms::LogLevel lvl;
    if (mms::parse_log_level(env, lvl)) {
      mms::set_log_level(lvl);
    } else {
      std::cerr << "warning: ignoring invalid MMS_LOG_LEVEL '" << env
                << "' (expected error, warn, info, or debug)\n";
    }
  }

  CLI::App app{"Multi-sensor localization and mapping toolkit"};
  app.require_subcommand(1);

  int rc = 0;
  mms::cli::register_simulate(app, rc);
  mms::cli::register_fuse(app, rc);
  mms::cli::register_slam(app, rc);
  mms::cli::register_eval(app, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mms::cli::kExitConfig;
  }
  return rc;
}
