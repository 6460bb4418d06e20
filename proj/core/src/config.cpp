#include "mms/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mms/errors.hpp"

namespace mms {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  raise(Errc::config_error, origin + ": " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                const std::string& origin) {
  if (!j.is_object()) {
    fail(origin, path + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      std::string list;
      for (const char* a : allowed) {
        if (!list.empty()) list += ", ";
        list += a;
      }
      fail(origin, "unknown key '" + path + key + "' (allowed: " + list + ")");
    }
  }
}

double get_number(const json& j, const std::string& path, const std::string& origin) {
  if (!j.is_number()) {
    fail(origin, path + " must be a number");
  }
  return j.get<double>();
}

double get_nonnegative(const json& j, const std::string& path, const std::string& origin) {
  const double v = get_number(j, path, origin);
  if (!(v >= 0.0) || !std::isfinite(v)) {
    fail(origin, path + " must be finite and >= 0");
  }
  return v;
}

bool get_bool(const json& j, const std::string& path, const std::string& origin) {
  if (!j.is_boolean()) {
    fail(origin, path + " must be a boolean");
  }
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path, const std::string& origin) {
  if (!j.is_string()) {
    fail(origin, path + " must be a string");
  }
  return j.get<std::string>();
}

void parse_sim(const json& j, SimOverrides& sim, const std::string& origin) {
  check_keys(j, "sim.", {"imu", "mag", "gnss", "depth"}, origin);
  if (j.contains("imu")) {
    const json& imu = j.at("imu");
    check_keys(imu, "sim.imu.",
               {"gyro_white_sigma", "gyro_bias_walk_sigma", "accel_white_sigma",
                "accel_bias_walk_sigma", "init_gyro_bias_sigma", "init_accel_bias_sigma"},
               origin);
    if (imu.contains("gyro_white_sigma")) {
      sim.gyro_white_sigma = get_nonnegative(imu.at("gyro_white_sigma"), "sim.imu.gyro_white_sigma", origin);
    }
    if (imu.contains("gyro_bias_walk_sigma")) {
      sim.gyro_bias_walk_sigma =
          get_nonnegative(imu.at("gyro_bias_walk_sigma"), "sim.imu.gyro_bias_walk_sigma", origin);
    }
    if (imu.contains("accel_white_sigma")) {
      sim.accel_white_sigma =
          get_nonnegative(imu.at("accel_white_sigma"), "sim.imu.accel_white_sigma", origin);
    }
    if (imu.contains("accel_bias_walk_sigma")) {
      sim.accel_bias_walk_sigma =
          get_nonnegative(imu.at("accel_bias_walk_sigma"), "sim.imu.accel_bias_walk_sigma", origin);
    }
    if (imu.contains("init_gyro_bias_sigma")) {
      sim.init_gyro_bias_sigma =
          get_nonnegative(imu.at("init_gyro_bias_sigma"), "sim.imu.init_gyro_bias_sigma", origin);
    }
    if (imu.contains("init_accel_bias_sigma")) {
      sim.init_accel_bias_sigma =
          get_nonnegative(imu.at("init_accel_bias_sigma"), "sim.imu.init_accel_bias_sigma", origin);
    }
  }
  if (j.contains("mag")) {
    const json& mag = j.at("mag");
    check_keys(mag, "sim.mag.", {"sigma_gauss"}, origin);
    if (mag.contains("sigma_gauss")) {
      sim.mag_sigma_gauss = get_nonnegative(mag.at("sigma_gauss"), "sim.mag.sigma_gauss", origin);
    }
  }
  if (j.contains("gnss")) {
    const json& gnss = j.at("gnss");
    check_keys(gnss, "sim.gnss.",
               {"mode", "horizontal_sigma_m", "vertical_sigma_m", "degraded_inflation",
                "degraded_dropout"},
               origin);
    if (gnss.contains("mode")) {
      const std::string mode = get_string(gnss.at("mode"), "sim.gnss.mode", origin);
      GnssMode parsed{};
      if (!parse_gnss_mode(mode, parsed)) {
        fail(origin, "sim.gnss.mode: unknown mode '" + mode +
                         "' (expected standard, rtk_float, rtk_fixed or no_fix)");
      }
      sim.gnss_mode = parsed;
    }
    if (gnss.contains("horizontal_sigma_m")) {
      sim.gnss_horizontal_sigma_m =
          get_nonnegative(gnss.at("horizontal_sigma_m"), "sim.gnss.horizontal_sigma_m", origin);
    }
    if (gnss.contains("vertical_sigma_m")) {
      sim.gnss_vertical_sigma_m =
          get_nonnegative(gnss.at("vertical_sigma_m"), "sim.gnss.vertical_sigma_m", origin);
    }
    if (gnss.contains("degraded_inflation")) {
      sim.gnss_degraded_inflation =
          get_nonnegative(gnss.at("degraded_inflation"), "sim.gnss.degraded_inflation", origin);
    }
    if (gnss.contains("degraded_dropout")) {
      const double v =
          get_nonnegative(gnss.at("degraded_dropout"), "sim.gnss.degraded_dropout", origin);
      if (v > 1.0) {
        fail(origin, "sim.gnss.degraded_dropout must be in [0, 1]");
      }
      sim.gnss_degraded_dropout = v;
    }
  }
  if (j.contains("depth")) {
    const json& depth = j.at("depth");
    check_keys(depth, "sim.depth.", {"sigma_per_meter"}, origin);
    if (depth.contains("sigma_per_meter")) {
      sim.depth_sigma_per_meter =
          get_nonnegative(depth.at("sigma_per_meter"), "sim.depth.sigma_per_meter", origin);
    }
  }
}

void parse_filter(const json& j, FilterRunConfig& filter, const std::string& origin) {
  check_keys(j, "filter.",
             {"init_mode", "gate_confidence", "declination_deg", "vo_cov_scale", "enable_vo",
              "enable_gnss", "enable_mag", "mag_sigma_gauss", "process", "init_cov", "vo"},
             origin);
  if (j.contains("init_mode")) {
    const std::string mode = get_string(j.at("init_mode"), "filter.init_mode", origin);
    try {
      filter.init_mode = parse_init_mode(mode);
    } catch (const Error& e) {
      fail(origin, std::string("filter.init_mode: ") + e.what());
    }
  }
  if (j.contains("gate_confidence")) {
    const double c = get_number(j.at("gate_confidence"), "filter.gate_confidence", origin);
    if (std::abs(c - 0.95) > 1e-9 && std::abs(c - 0.99) > 1e-9 && std::abs(c - 0.997) > 1e-9) {
      fail(origin, "filter.gate_confidence must be one of 0.95, 0.99, 0.997");
    }
    filter.ekf.gate_confidence = c;
  }
  if (j.contains("declination_deg")) {
    filter.ekf.declination_rad =
        get_number(j.at("declination_deg"), "filter.declination_deg", origin) * M_PI / 180.0;
  }
  if (j.contains("vo_cov_scale")) {
    const double v = get_number(j.at("vo_cov_scale"), "filter.vo_cov_scale", origin);
    if (!(v > 0.0)) {
      fail(origin, "filter.vo_cov_scale must be > 0");
    }
    filter.ekf.vo_cov_scale = v;
  }
  if (j.contains("enable_vo")) {
    filter.enable_vo = get_bool(j.at("enable_vo"), "filter.enable_vo", origin);
  }
  if (j.contains("enable_gnss")) {
    filter.enable_gnss = get_bool(j.at("enable_gnss"), "filter.enable_gnss", origin);
  }
  if (j.contains("enable_mag")) {
    filter.enable_mag = get_bool(j.at("enable_mag"), "filter.enable_mag", origin);
  }
  if (j.contains("mag_sigma_gauss")) {
    filter.ekf.mag_sigma_gauss =
        get_nonnegative(j.at("mag_sigma_gauss"), "filter.mag_sigma_gauss", origin);
  }
  if (j.contains("process")) {
    const json& p = j.at("process");
    check_keys(p, "filter.process.",
               {"gyro_white_sigma", "gyro_bias_walk_sigma", "accel_white_sigma",
                "accel_bias_walk_sigma"},
               origin);
    if (p.contains("gyro_white_sigma")) {
      filter.ekf.process.gyro_white_sigma =
          get_nonnegative(p.at("gyro_white_sigma"), "filter.process.gyro_white_sigma", origin);
    }
    if (p.contains("gyro_bias_walk_sigma")) {
      filter.ekf.process.gyro_bias_walk_sigma = get_nonnegative(
          p.at("gyro_bias_walk_sigma"), "filter.process.gyro_bias_walk_sigma", origin);
    }
    if (p.contains("accel_white_sigma")) {
      filter.ekf.process.accel_white_sigma =
          get_nonnegative(p.at("accel_white_sigma"), "filter.process.accel_white_sigma", origin);
    }
    if (p.contains("accel_bias_walk_sigma")) {
      filter.ekf.process.accel_bias_walk_sigma = get_nonnegative(
          p.at("accel_bias_walk_sigma"), "filter.process.accel_bias_walk_sigma", origin);
    }
  }
  if (j.contains("init_cov")) {
    const json& ic = j.at("init_cov");
    check_keys(ic, "filter.init_cov.", {"pos", "vel", "att", "gyro_bias", "accel_bias"}, origin);
    if (ic.contains("pos")) {
      filter.ekf.init_cov.pos = get_nonnegative(ic.at("pos"), "filter.init_cov.pos", origin);
    }
    if (ic.contains("vel")) {
      filter.ekf.init_cov.vel = get_nonnegative(ic.at("vel"), "filter.init_cov.vel", origin);
    }
    if (ic.contains("att")) {
      filter.ekf.init_cov.att = get_nonnegative(ic.at("att"), "filter.init_cov.att", origin);
    }
    if (ic.contains("gyro_bias")) {
      filter.ekf.init_cov.gyro_bias =
          get_nonnegative(ic.at("gyro_bias"), "filter.init_cov.gyro_bias", origin);
    }
    if (ic.contains("accel_bias")) {
      filter.ekf.init_cov.accel_bias =
          get_nonnegative(ic.at("accel_bias"), "filter.init_cov.accel_bias", origin);
    }
  }
  if (j.contains("vo")) {
    const json& vo = j.at("vo");
    check_keys(vo, "filter.vo.", {"depth_sigma_per_meter", "ransac_iterations", "min_inliers"},
               origin);
    if (vo.contains("depth_sigma_per_meter")) {
      filter.vo.depth_sigma_per_meter =
          get_nonnegative(vo.at("depth_sigma_per_meter"), "filter.vo.depth_sigma_per_meter", origin);
    }
    if (vo.contains("ransac_iterations")) {
      const double v = get_number(vo.at("ransac_iterations"), "filter.vo.ransac_iterations", origin);
      if (v < 1.0 || v != std::floor(v)) {
        fail(origin, "filter.vo.ransac_iterations must be a positive integer");
      }
      filter.vo.ransac_iterations = static_cast<int>(v);
    }
    if (vo.contains("min_inliers")) {
      const double v = get_number(vo.at("min_inliers"), "filter.vo.min_inliers", origin);
      if (v < 3.0 || v != std::floor(v)) {
        fail(origin, "filter.vo.min_inliers must be an integer >= 3");
      }
      filter.vo.min_inliers = static_cast<int>(v);
    }
  }
}

void parse_slam(const json& j, SlamParams& slam, const std::string& origin) {
  check_keys(j, "slam.",
             {"keyframe_translation_m", "keyframe_rotation_deg", "loop_id_gap",
              "loop_max_distance_m", "loop_min_jaccard", "voxel_size_m", "odom_trans_sigma_m",
              "odom_rot_sigma_deg"},
             origin);
  if (j.contains("keyframe_translation_m")) {
    slam.keyframe.min_translation_m =
        get_nonnegative(j.at("keyframe_translation_m"), "slam.keyframe_translation_m", origin);
  }
  if (j.contains("keyframe_rotation_deg")) {
    slam.keyframe.min_rotation_rad =
        get_nonnegative(j.at("keyframe_rotation_deg"), "slam.keyframe_rotation_deg", origin) *
        M_PI / 180.0;
  }
  if (j.contains("loop_id_gap")) {
    const double v = get_number(j.at("loop_id_gap"), "slam.loop_id_gap", origin);
    if (v < 0.0 || v != std::floor(v)) {
      fail(origin, "slam.loop_id_gap must be a nonnegative integer");
    }
    slam.loop.min_id_gap = static_cast<int>(v);
  }
  if (j.contains("loop_max_distance_m")) {
    slam.loop.max_distance_m =
        get_nonnegative(j.at("loop_max_distance_m"), "slam.loop_max_distance_m", origin);
  }
  if (j.contains("loop_min_jaccard")) {
    const double v = get_nonnegative(j.at("loop_min_jaccard"), "slam.loop_min_jaccard", origin);
    if (v > 1.0) {
      fail(origin, "slam.loop_min_jaccard must be in [0, 1]");
    }
    slam.loop.min_jaccard = v;
  }
  if (j.contains("voxel_size_m")) {
    const double v = get_number(j.at("voxel_size_m"), "slam.voxel_size_m", origin);
    if (!(v > 0.0)) {
      fail(origin, "slam.voxel_size_m must be > 0");
    }
    slam.voxel_size_m = v;
  }
  if (j.contains("odom_trans_sigma_m")) {
    const double v = get_number(j.at("odom_trans_sigma_m"), "slam.odom_trans_sigma_m", origin);
    if (!(v > 0.0)) {
      fail(origin, "slam.odom_trans_sigma_m must be > 0");
    }
    slam.odom_trans_sigma_m = v;
  }
  if (j.contains("odom_rot_sigma_deg")) {
    const double v = get_number(j.at("odom_rot_sigma_deg"), "slam.odom_rot_sigma_deg", origin);
    if (!(v > 0.0)) {
      fail(origin, "slam.odom_rot_sigma_deg must be > 0");
    }
    slam.odom_rot_sigma_rad = v * M_PI / 180.0;
  }
}

void parse_eval(const json& j, MetricOptions& eval, const std::string& origin) {
  check_keys(j, "eval.", {"max_dt_s", "align", "rpe_distance_m"}, origin);
  if (j.contains("max_dt_s")) {
    const double v = get_number(j.at("max_dt_s"), "eval.max_dt_s", origin);
    if (!(v > 0.0)) {
      fail(origin, "eval.max_dt_s must be > 0");
    }
    eval.max_dt = v;
  }
  if (j.contains("align")) {
    eval.align = get_bool(j.at("align"), "eval.align", origin);
  }
  if (j.contains("rpe_distance_m")) {
    const double v = get_number(j.at("rpe_distance_m"), "eval.rpe_distance_m", origin);
    if (!(v > 0.0)) {
      fail(origin, "eval.rpe_distance_m must be > 0");
    }
    eval.rpe_distance_m = v;
  }
}

}  // namespace

void SimOverrides::apply(SimParams& params) const {
  if (gyro_white_sigma) params.imu.gyro_white_sigma = *gyro_white_sigma;
  if (gyro_bias_walk_sigma) params.imu.gyro_bias_walk_sigma = *gyro_bias_walk_sigma;
  if (accel_white_sigma) params.imu.accel_white_sigma = *accel_white_sigma;
  if (accel_bias_walk_sigma) params.imu.accel_bias_walk_sigma = *accel_bias_walk_sigma;
  if (init_gyro_bias_sigma) params.imu.init_gyro_bias_sigma = *init_gyro_bias_sigma;
  if (init_accel_bias_sigma) params.imu.init_accel_bias_sigma = *init_accel_bias_sigma;
  if (mag_sigma_gauss) params.mag.sigma_gauss = *mag_sigma_gauss;
  if (depth_sigma_per_meter) params.depth.sigma_per_meter = *depth_sigma_per_meter;
  if (gnss_mode) params.gnss.mode = *gnss_mode;
  if (gnss_horizontal_sigma_m) params.gnss.horizontal_sigma_m = *gnss_horizontal_sigma_m;
  if (gnss_vertical_sigma_m) params.gnss.vertical_sigma_m = *gnss_vertical_sigma_m;
  if (gnss_degraded_inflation) params.gnss.degraded_inflation = *gnss_degraded_inflation;
  if (gnss_degraded_dropout) params.gnss.degraded_dropout = *gnss_degraded_dropout;
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) {
    fail(origin, "not valid JSON");
  }
  RunConfig cfg;
  check_keys(doc, "", {"scenario", "seed", "out_dir", "sim", "filter", "slam", "eval"}, origin);
  if (doc.contains("scenario")) {
    cfg.scenario = get_string(doc.at("scenario"), "scenario", origin);
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned()) {
      fail(origin, "seed must be a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("out_dir")) {
    cfg.out_dir = get_string(doc.at("out_dir"), "out_dir", origin);
  }
  if (doc.contains("sim")) parse_sim(doc.at("sim"), cfg.sim, origin);
  if (doc.contains("filter")) parse_filter(doc.at("filter"), cfg.filter, origin);
  if (doc.contains("slam")) parse_slam(doc.at("slam"), cfg.slam, origin);
  if (doc.contains("eval")) parse_eval(doc.at("eval"), cfg.eval, origin);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    raise(Errc::io_error, "load_run_config: cannot open " + path);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path);
}

}  // namespace mms
