#pragma once

#include <cstdint>
#include <vector>

#include "mms/ekf.hpp"
#include "mms/records.hpp"
#include "mms/vo.hpp"

namespace mms {

enum class InitMode {
  truth,       // start exactly on the logged ground truth
  prior_draw,  // truth plus a seeded draw from the initial covariance
};

const char* init_mode_name(InitMode m);
InitMode parse_init_mode(const std::string& name);

/// Replay configuration: filter tuning, front-end tuning, and which update
/// sources participate. Disabling every source leaves pure IMU dead
/// reckoning.
struct FilterRunConfig {
  EkfConfig ekf;
  VoParams vo;
  bool enable_vo = true;
  bool enable_gnss = true;
  bool enable_mag = true;
  InitMode init_mode = InitMode::truth;
  std::uint64_t seed = 0;  // drives the prior draw and the VO sampler
};

struct FilterCounters {
  std::int64_t predicts = 0;
  std::int64_t out_of_order_dropped = 0;
  std::int64_t gnss_no_fix_skipped = 0;
  std::int64_t gnss_updates = 0;
  std::int64_t vo_frames = 0;
  std::int64_t vo_updates = 0;
  std::int64_t vo_invalid = 0;
  std::int64_t mag_updates = 0;
  std::int64_t mag_too_weak = 0;
};

struct FilterResult {
  std::vector<NavState> states;         // one per IMU record, post same-time updates
  std::vector<Mat3> position_covs;      // filter position covariance per state
  std::vector<MeasurementReport> reports;
  std::vector<GroundTruth> truth;       // ground-truth records carried through
  FilterCounters counters;
};

/// Replays a sensor log through the filter. IMU records drive prediction
/// (each sample covers the interval up to the next one); GNSS, VO, and MAG
/// records become updates applied at their timestamps; GNSS records without
/// a fix are skipped outright. One state is emitted per IMU record, after
/// all same-timestamp updates. Throws EmptyLog, UnsortedLog, and
/// FormatError (no ground-truth record to initialize from).
FilterResult run_filter(const SensorLog& log, const FilterRunConfig& config);

}  // namespace mms
