#include "mms/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "mms/errors.hpp"
#include "mms/logging.hpp"
#include "mms/random.hpp"

namespace mms {

namespace {

// Independent noise streams per sensor, so enabling/disabling one sensor
// never shifts the randomness of another.
enum SeedStream : std::uint64_t {
  kStreamInitBias = 0,
  kStreamImu = 1,
  kStreamMag = 2,
  kStreamGnss = 3,
  kStreamDepth = 4,
};

Vec3 clamp_per_axis(const Vec3& v, double limit) {
  return v.cwiseMax(-limit).cwiseMin(limit);
}

long long sample_count(double duration, double rate_hz) {
  return std::llround(duration * rate_hz);
}

}  // namespace

GnssEnvironment World::environment_at(const Vec3& p) const {
  for (const auto& region : regions) {
    if (region.box.contains(p)) return region.env;
  }
  return default_env;
}

Quat CameraModel::default_mount() {
  // Optical axes expressed in the body frame: x(right) -> -y, y(down) -> -z,
  // z(forward) -> +x.
  Mat3 r;
  r << 0, 0, 1,
      -1, 0, 0,
      0, -1, 0;
  return quat_from_matrix(r);
}

ImuBiasState draw_initial_biases(const ImuNoiseParams& noise, std::uint64_t seed) {
  GaussianSampler rng(derive_seed(seed, kStreamInitBias));
  ImuBiasState b;
  b.gyro = noise.init_gyro_bias_sigma * rng.sample_vec3();
  b.accel = noise.init_accel_bias_sigma * rng.sample_vec3();
  return b;
}

std::vector<ImuSample> gen_imu(const PathSampler& path, const ImuNoiseParams& noise,
                               double rate_hz, std::uint64_t seed,
                               const ImuBiasState& initial_bias) {
  GaussianSampler rng(derive_seed(seed, kStreamImu));
  double duration = path.duration();
  long long n = sample_count(duration, rate_hz);
  Vec3 gravity(0.0, 0.0, -kGravityMps2);

  std::vector<ImuSample> out;
  out.reserve(static_cast<std::size_t>(n));
  ImuBiasState bias = initial_bias;
  for (long long k = 0; k < n; ++k) {
    double t0 = static_cast<double>(k) / rate_hz;
    double t1 = std::min(static_cast<double>(k + 1) / rate_hz, duration);
    double dt = t1 - t0;
    GroundTruth g0 = path.sample(t0);
    GroundTruth g1 = path.sample(t1);

    // Average body rate and specific force over [t0, t1]: the delta-angle /
    // delta-velocity outputs of a strapdown unit, divided by dt. An Euler
    // mechanization of the same discrete form then reconstructs the
    // trajectory exactly up to noise.
    Vec3 omega = Vec3::Zero();
    Vec3 force = rotate(quat_conjugate(g0.pose.rotation), -gravity);
    if (dt > 0.0) {
      Quat dq = quat_mul(quat_conjugate(g0.pose.rotation), g1.pose.rotation);
      omega = quat_log(dq) / dt;
      force = rotate(quat_conjugate(g0.pose.rotation), (g1.velocity - g0.velocity) / dt - gravity);
    }

    ImuSample s;
    s.t = t0;
    s.gyro = clamp_per_axis(omega + bias.gyro + noise.gyro_white_sigma * rng.sample_vec3(),
                            kGyroLimitRadPerSec);
    s.accel = clamp_per_axis(force + bias.accel + noise.accel_white_sigma * rng.sample_vec3(),
                             kAccelLimitMps2);
    out.push_back(s);

    bias.gyro += noise.gyro_bias_walk_sigma * rng.sample_vec3();
    bias.accel += noise.accel_bias_walk_sigma * rng.sample_vec3();
  }
  return out;
}

std::vector<MagSample> gen_mag(const PathSampler& path, const MagNoiseParams& noise,
                               const Vec3& world_field, double rate_hz, std::uint64_t seed) {
  GaussianSampler rng(derive_seed(seed, kStreamMag));
  double duration = path.duration();
  long long n = sample_count(duration, rate_hz);
  std::vector<MagSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    double t = static_cast<double>(k) / rate_hz;
    GroundTruth g = path.sample(t);
    MagSample s;
    s.t = t;
    s.field = clamp_per_axis(
        rotate(quat_conjugate(g.pose.rotation), world_field) + noise.sigma_gauss * rng.sample_vec3(),
        kMagLimitGauss);
    out.push_back(s);
  }
  return out;
}

std::vector<GnssFix> gen_gnss(const PathSampler& path, const World& world, const Datum& datum,
                              const GnssNoiseParams& noise, double rate_hz, std::uint64_t seed) {
  GaussianSampler rng(derive_seed(seed, kStreamGnss));
  double duration = path.duration();
  long long n = sample_count(duration, rate_hz);

  double h_sigma = noise.horizontal_sigma_m;
  double v_sigma = noise.vertical_sigma_m;
  if (h_sigma <= 0.0 || v_sigma <= 0.0) {
    gnss_default_sigmas(noise.mode, h_sigma, v_sigma);
  }

  std::vector<GnssFix> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    double t = static_cast<double>(k) / rate_hz;
    GroundTruth g = path.sample(t);
    GnssEnvironment env = world.environment_at(g.pose.translation);

    GnssFix fix;
    fix.t = t;
    fix.mode = GnssMode::no_fix;
    if (env != GnssEnvironment::denied) {
      bool dropped = false;
      double hs = h_sigma, vs = v_sigma;
      if (env == GnssEnvironment::degraded) {
        dropped = rng.uniform01() < noise.degraded_dropout;
        hs *= noise.degraded_inflation;
        vs *= noise.degraded_inflation;
      }
      if (!dropped) {
        Vec3 noisy = g.pose.translation +
                     Vec3(hs * rng.sample(), hs * rng.sample(), vs * rng.sample());
        fix.coord = enu_to_geodetic(noisy, datum);
        fix.horizontal_sigma_m = hs;
        fix.vertical_sigma_m = vs;
        fix.mode = noise.mode;
      }
    }
    out.push_back(fix);
  }
  return out;
}

Vec3 world_to_camera(const Pose3& body_pose, const CameraModel& camera, const Vec3& world_point) {
  Vec3 p_body = rotate(quat_conjugate(body_pose.rotation), world_point - body_pose.translation);
  return rotate(quat_conjugate(camera.body_from_camera), p_body);
}

bool in_frustum(const CameraModel& camera, const Vec3& p) {
  if (p.z() < camera.min_depth_m || p.z() > camera.max_depth_m) return false;
  double half_h = 0.5 * camera.hfov_deg * 3.14159265358979323846 / 180.0;
  double half_v = 0.5 * camera.vfov_deg * 3.14159265358979323846 / 180.0;
  return std::abs(std::atan2(p.x(), p.z())) <= half_h &&
         std::abs(std::atan2(p.y(), p.z())) <= half_v;
}

std::vector<DepthFrame> gen_depth_frames(const PathSampler& path, const World& world,
                                         const CameraModel& camera, const DepthNoiseParams& noise,
                                         double rate_hz, std::uint64_t seed) {
  GaussianSampler rng(derive_seed(seed, kStreamDepth));
  double duration = path.duration();
  long long n = sample_count(duration, rate_hz);
  std::vector<DepthFrame> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    DepthFrame frame;
    frame.t = static_cast<double>(k) / rate_hz;
    GroundTruth g = path.sample(frame.t);
    // Landmarks are kept sorted by id, so observation order (and the noise
    // stream) is reproducible.
    for (const auto& lm : world.landmarks) {
      Vec3 p_cam = world_to_camera(g.pose, camera, lm.position);
      if (!in_frustum(camera, p_cam)) continue;
      DepthObservation obs;
      obs.landmark_id = lm.id;
      obs.point = p_cam + noise.sigma_per_meter * p_cam.z() * rng.sample_vec3();
      // Visibility is decided on true geometry; noise may push the depth
      // just past the sensor range, where the device would clamp.
      obs.point.z() = std::clamp(obs.point.z(), camera.min_depth_m, camera.max_depth_m);
      frame.observations.push_back(obs);
    }
    out.push_back(std::move(frame));
  }
  return out;
}

std::vector<GroundTruth> gen_truth(const PathSampler& path, double rate_hz) {
  double duration = path.duration();
  long long n = sample_count(duration, rate_hz);
  std::vector<GroundTruth> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    out.push_back(path.sample(static_cast<double>(k) / rate_hz));
  }
  return out;
}

SensorLog run_simulation(const World& world, const TrajectorySpec& spec, const SimParams& params,
                         const std::string& scenario_name, std::uint64_t seed) {
  PathSampler path(spec);

  ImuBiasState bias = draw_initial_biases(params.imu, seed);
  auto imu = gen_imu(path, params.imu, spec.imu_rate_hz, seed, bias);
  auto mag = gen_mag(path, params.mag, params.mag_world_field, params.mag_rate_hz, seed);
  auto gnss = gen_gnss(path, world, params.datum, params.gnss, spec.gnss_rate_hz, seed);
  auto depth = gen_depth_frames(path, world, params.camera, params.depth, spec.cam_rate_hz, seed);
  auto truth = gen_truth(path, params.truth_rate_hz);

  SensorLog log;
  log.header.format_version = 1;
  log.header.scenario = scenario_name;
  log.header.datum = params.datum;
  log.header.seed = seed;
  log.records.reserve(imu.size() + mag.size() + gnss.size() + depth.size() + truth.size());
  for (auto& r : imu) log.records.emplace_back(std::move(r));
  for (auto& r : mag) log.records.emplace_back(std::move(r));
  for (auto& r : depth) log.records.emplace_back(std::move(r));
  for (auto& r : gnss) log.records.emplace_back(std::move(r));
  for (auto& r : truth) log.records.emplace_back(std::move(r));
  std::stable_sort(log.records.begin(), log.records.end(),
                   [](const SensorRecord& a, const SensorRecord& b) {
                     double ta = record_time(a), tb = record_time(b);
                     if (ta != tb) return ta < tb;
                     return static_cast<int>(record_kind(a)) < static_cast<int>(record_kind(b));
                   });

  MMS_INFO("simulated '" << scenario_name << "' seed " << seed << ": " << imu.size() << " imu, "
                         << mag.size() << " mag, " << depth.size() << " depth, " << gnss.size()
                         << " gnss, " << truth.size() << " truth records");
  return log;
}

}  // namespace mms
