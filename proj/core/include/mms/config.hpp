#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mms/evaluation.hpp"
#include "mms/geodesy.hpp"
#include "mms/pipeline.hpp"
#include "mms/simulation.hpp"
#include "mms/slam.hpp"

namespace mms {

/// Sensor-model overrides applied on top of a scenario's built-in
/// parameters; only fields present in the config document take effect.
struct SimOverrides {
  std::optional<double> gyro_white_sigma;
  std::optional<double> gyro_bias_walk_sigma;
  std::optional<double> accel_white_sigma;
  std::optional<double> accel_bias_walk_sigma;
  std::optional<double> init_gyro_bias_sigma;
  std::optional<double> init_accel_bias_sigma;
  std::optional<double> mag_sigma_gauss;
  std::optional<double> depth_sigma_per_meter;
  std::optional<GnssMode> gnss_mode;
  std::optional<double> gnss_horizontal_sigma_m;
  std::optional<double> gnss_vertical_sigma_m;
  std::optional<double> gnss_degraded_inflation;
  std::optional<double> gnss_degraded_dropout;

  void apply(SimParams& params) const;
};

/// One validated document configuring the whole pipeline. Every field has
/// a default; unknown keys anywhere in the document are errors.
struct RunConfig {
  std::string scenario = "outdoor";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  SimOverrides sim;
  FilterRunConfig filter;
  SlamParams slam;
  MetricOptions eval;
};

/// Parses and validates a JSON config document. `origin` names the source
/// (file path) for error messages. Throws ConfigError.
RunConfig parse_run_config(const std::string& json_text, const std::string& origin);

/// Reads the file and parses it. Throws IoError, ConfigError.
RunConfig load_run_config(const std::string& path);

}  // namespace mms
