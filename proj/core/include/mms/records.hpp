#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mms/geodesy.hpp"
#include "mms/geometry.hpp"

namespace mms {

/// Inertial sample in the body frame. accel is specific force (gravity shows
/// up as +9.80665 on z when sitting still, level).
struct ImuSample {
  double t = 0.0;       // seconds
  Vec3 gyro = Vec3::Zero();   // rad/s
  Vec3 accel = Vec3::Zero();  // m/s^2
};

struct MagSample {
  double t = 0.0;
  Vec3 field = Vec3::Zero();  // gauss, body frame
};

struct DepthObservation {
  std::int64_t landmark_id = 0;
  Vec3 point = Vec3::Zero();  // camera optical frame: z forward, x right, y down
};

struct DepthFrame {
  double t = 0.0;
  std::vector<DepthObservation> observations;
};

struct GroundTruth {
  double t = 0.0;
  Pose3 pose;                     // body -> world
  Vec3 velocity = Vec3::Zero();   // world frame, m/s
};

/// Fused navigation state at one instant; also the row type of trajectory
/// CSV files (biases are filter-internal and stay out of the files).
struct NavState {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Quat orientation;                  // body -> world
  Vec3 gyro_bias = Vec3::Zero();     // rad/s
  Vec3 accel_bias = Vec3::Zero();    // m/s^2
};

/// Record tags in merge tie-break order: records sharing a timestamp sort
/// IMU < MAG < DEPTH < GNSS < TRUTH so prediction precedes updates.
enum class RecordKind { imu = 0, mag = 1, depth = 2, gnss = 3, truth = 4 };

const char* record_kind_name(RecordKind k);

using SensorRecord = std::variant<ImuSample, MagSample, DepthFrame, GnssFix, GroundTruth>;

double record_time(const SensorRecord& r);
RecordKind record_kind(const SensorRecord& r);

struct LogHeader {
  int format_version = 1;
  std::string scenario;
  Datum datum;
  std::uint64_t seed = 0;
};

struct SensorLog {
  LogHeader header;
  std::vector<SensorRecord> records;  // nondecreasing in time
};

}  // namespace mms
