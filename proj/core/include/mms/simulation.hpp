#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mms/geodesy.hpp"
#include "mms/records.hpp"
#include "mms/trajectory.hpp"

namespace mms {

enum class GnssEnvironment { open_sky, degraded, denied };

struct Landmark {
  std::int64_t id = 0;
  Vec3 position = Vec3::Zero();  // world frame
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

struct GnssRegion {
  Box box;
  GnssEnvironment env = GnssEnvironment::denied;
};

struct World {
  std::vector<Landmark> landmarks;  // unique ids, sorted by id
  Box bounds;
  std::vector<GnssRegion> regions;  // first containing region wins
  GnssEnvironment default_env = GnssEnvironment::denied;

  GnssEnvironment environment_at(const Vec3& p) const;
};

/// Pinhole-style frustum: z forward, x right, y down (optical convention).
/// body_from_camera is the fixed rotation-only mount: optical z maps to body
/// x (forward), optical x to body -y (right), optical y to body -z (down).
struct CameraModel {
  double hfov_deg = 87.0;
  double vfov_deg = 58.0;
  double min_depth_m = 0.2;
  double max_depth_m = 10.0;
  Quat body_from_camera = default_mount();

  static Quat default_mount();
};

struct ImuNoiseParams {
  double gyro_white_sigma = 0.005;       // rad/s per sample
  double gyro_bias_walk_sigma = 1e-5;    // rad/s added per sample step
  double accel_white_sigma = 0.05;       // m/s^2 per sample
  double accel_bias_walk_sigma = 1e-4;   // m/s^2 added per sample step
  double init_gyro_bias_sigma = 0.01;    // rad/s, drawn once per run
  double init_accel_bias_sigma = 0.1;    // m/s^2, drawn once per run
};

struct MagNoiseParams {
  double sigma_gauss = 0.005;  // per axis
};

struct GnssNoiseParams {
  GnssMode mode = GnssMode::standard;  // mode used where the sky is open
  // 0 = use the per-mode defaults from gnss_default_sigmas().
  double horizontal_sigma_m = 0.0;
  double vertical_sigma_m = 0.0;
  double degraded_inflation = 5.0;  // sigma multiplier in degraded regions
  double degraded_dropout = 0.2;    // fraction of degraded fixes lost
};

struct DepthNoiseParams {
  double sigma_per_meter = 0.01;  // isotropic, scaled by point depth
};

struct SimParams {
  ImuNoiseParams imu;
  MagNoiseParams mag;
  GnssNoiseParams gnss;
  DepthNoiseParams depth;
  CameraModel camera;
  double mag_rate_hz = 50.0;
  double truth_rate_hz = 30.0;
  Vec3 mag_world_field = Vec3(0.0, 0.22, -0.42);  // gauss, ENU
  Datum datum;  // scenario anchor for emitted fixes
};

// Sensor limits: readings are clamped to the device's measurement range.
inline constexpr double kGyroLimitRadPerSec = 2000.0 * 3.14159265358979323846 / 180.0;
inline constexpr double kAccelLimitMps2 = 8.0 * 9.80665;
inline constexpr double kMagLimitGauss = 1.3;
inline constexpr double kGravityMps2 = 9.80665;

/// True initial IMU biases for one run, drawn from the initial-bias prior so
/// a filter stating that prior is honest about them.
struct ImuBiasState {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();
};

ImuBiasState draw_initial_biases(const ImuNoiseParams& noise, std::uint64_t seed);

/// IMU samples at spec.imu_rate_hz over the whole path. Each sample holds
/// the average body rate / specific force over [t_k, t_k + dt] — the
/// delta-angle/delta-velocity quantity a strapdown unit integrates — so a
/// discrete mechanization of the same form reconstructs the path exactly up
/// to noise. Gravity appears as +9.80665 on body z at rest.
std::vector<ImuSample> gen_imu(const PathSampler& path, const ImuNoiseParams& noise,
                               double rate_hz, std::uint64_t seed,
                               const ImuBiasState& initial_bias);

std::vector<MagSample> gen_mag(const PathSampler& path, const MagNoiseParams& noise,
                               const Vec3& world_field, double rate_hz, std::uint64_t seed);

std::vector<GnssFix> gen_gnss(const PathSampler& path, const World& world, const Datum& datum,
                              const GnssNoiseParams& noise, double rate_hz, std::uint64_t seed);

/// Frustum-culled landmark observations with depth-proportional noise;
/// visibility is decided on the true geometry, observations are sorted by
/// landmark id.
std::vector<DepthFrame> gen_depth_frames(const PathSampler& path, const World& world,
                                         const CameraModel& camera, const DepthNoiseParams& noise,
                                         double rate_hz, std::uint64_t seed);

std::vector<GroundTruth> gen_truth(const PathSampler& path, double rate_hz);

/// Camera-frame coordinates of a world point given the body pose.
Vec3 world_to_camera(const Pose3& body_pose, const CameraModel& camera, const Vec3& world_point);

/// True frustum test used by the generator (and by the brute-force test
/// oracle, which re-implements it independently).
bool in_frustum(const CameraModel& camera, const Vec3& camera_point);

/// Generates every stream and k-way merges them into a single time-sorted
/// log (ties break IMU < MAG < DEPTH < GNSS < TRUTH). Byte-deterministic in
/// (world, spec, params, seed).
SensorLog run_simulation(const World& world, const TrajectorySpec& spec, const SimParams& params,
                         const std::string& scenario_name, std::uint64_t seed);

}  // namespace mms
