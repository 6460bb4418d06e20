#pragma once

#include <functional>
#include <string>

#include <CLI11.hpp>

#include "mms/config.hpp"
#include "mms/errors.hpp"

namespace mms::cli {

// Exit codes are part of the CLI contract (CI scripts key on them).
constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBadLog = 3;
constexpr int kExitGraph = 4;
constexpr int kExitAssert = 5;

int exit_code_for(const Error& e);

/// Runs a command body, translating exceptions into the exit-code table
/// with a message on standard error.
int run_guarded(const std::function<int()>& body);

/// Loads the config file when a path was given, otherwise defaults.
RunConfig base_config(const std::string& config_path);

void register_simulate(CLI::App& app, int& rc);
void register_fuse(CLI::App& app, int& rc);
void register_slam(CLI::App& app, int& rc);
void register_eval(CLI::App& app, int& rc);

}  // namespace mms::cli
