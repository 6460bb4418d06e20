#include "mms/pipeline.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "mms/errors.hpp"
#include "mms/geodesy.hpp"
#include "mms/logging.hpp"
#include "mms/random.hpp"

namespace mms {
namespace {

// Stream id for the initial-state draw in prior_draw mode; distinct from
// every simulator stream so a shared seed never aliases.
constexpr std::uint64_t kStreamInitDraw = 9;

NavState initial_state(const GroundTruth& truth, const FilterRunConfig& config) {
  NavState s;
  s.t = truth.t;
  s.position = truth.pose.translation;
  s.velocity = truth.velocity;
  s.orientation = quat_normalize(truth.pose.rotation);
  s.gyro_bias = Vec3::Zero();
  s.accel_bias = Vec3::Zero();
  if (config.init_mode == InitMode::prior_draw) {
    // Perturb position, velocity, and attitude by a draw from the declared
    // initial covariance so the filter's stated uncertainty is honest from
    // the first step. Bias estimates stay at zero: the simulator draws the
    // true biases from the matching prior.
    GaussianSampler rng(derive_seed(config.seed, kStreamInitDraw));
    const auto& ic = config.ekf.init_cov;
    const double sp = std::sqrt(ic.pos);
    const double sv = std::sqrt(ic.vel);
    const double sa = std::sqrt(ic.att);
    Vec3 dp, dv, dth;
    for (int i = 0; i < 3; ++i) dp(i) = sp * rng.sample();
    for (int i = 0; i < 3; ++i) dv(i) = sv * rng.sample();
    for (int i = 0; i < 3; ++i) dth(i) = sa * rng.sample();
    s.position += dp;
    s.velocity += dv;
    s.orientation = quat_normalize(quat_mul(s.orientation, quat_exp(dth)));
  }
  return s;
}

}  // namespace

const char* init_mode_name(InitMode m) {
  switch (m) {
    case InitMode::truth:
      return "truth";
    case InitMode::prior_draw:
      return "prior_draw";
  }
  return "unknown";
}

InitMode parse_init_mode(const std::string& name) {
  if (name == "truth") return InitMode::truth;
  if (name == "prior_draw") return InitMode::prior_draw;
  raise(Errc::config_error, "unknown init mode '" + name + "' (expected truth or prior_draw)");
}

FilterResult run_filter(const SensorLog& log, const FilterRunConfig& config) {
  if (log.records.empty()) {
    raise(Errc::empty_log, "run_filter: log has no records");
  }
  for (std::size_t i = 1; i < log.records.size(); ++i) {
    if (record_time(log.records[i]) < record_time(log.records[i - 1])) {
      raise(Errc::unsorted_log,
            "run_filter: record " + std::to_string(i) + " goes back in time");
    }
  }

  // The filter starts from the first ground-truth record (simulated logs
  // carry one at the first timestamp).
  const GroundTruth* first_truth = nullptr;
  for (const auto& rec : log.records) {
    if (const auto* t = std::get_if<GroundTruth>(&rec)) {
      first_truth = t;
      break;
    }
  }
  if (first_truth == nullptr) {
    raise(Errc::format_error, "run_filter: no ground-truth record to initialize from");
  }

  VoParams vo_params = config.vo;
  vo_params.seed = config.seed;

  FilterResult out;
  Ekf ekf(initial_state(*first_truth, config), config.ekf);

  std::optional<ImuSample> pending_imu;
  std::optional<DepthFrame> prev_frame;

  // Zero-order hold on the most recent IMU sample: bring the state up to a
  // record's timestamp before that record is fused, so measurements are
  // linearized where they were taken rather than one IMU period behind
  // (during a turn that lag shows up as a systematic heading offset).
  const auto advance_to = [&](double t_target) {
    if (!pending_imu) return;
    const double dt = t_target - ekf.state().t;
    if (dt <= 0.0) return;
    ekf.predict(*pending_imu, dt);
    out.counters.predicts++;
  };

  const std::size_t n = log.records.size();
  std::size_t i = 0;
  while (i < n) {
    const double t_group = record_time(log.records[i]);
    if (t_group < first_truth->t) {
      // Records before the initialization time cannot be fused.
      out.counters.out_of_order_dropped++;
      MMS_WARN("run_filter: dropping record at t=" << t_group << " before init time");
      ++i;
      continue;
    }
    bool group_has_imu = false;
    // Process every record sharing this timestamp, then emit at most one row.
    for (; i < n && record_time(log.records[i]) == t_group; ++i) {
      const SensorRecord& rec = log.records[i];
      if (const auto* imu = std::get_if<ImuSample>(&rec)) {
        advance_to(imu->t);
        pending_imu = *imu;
        group_has_imu = true;
      } else if (const auto* mag = std::get_if<MagSample>(&rec)) {
        if (!config.enable_mag) continue;
        advance_to(mag->t);
        try {
          out.reports.push_back(ekf.update_mag(*mag));
          out.counters.mag_updates++;
        } catch (const Error& e) {
          if (e.code() != Errc::field_too_weak) throw;
          out.counters.mag_too_weak++;
        }
      } else if (const auto* frame = std::get_if<DepthFrame>(&rec)) {
        if (!config.enable_vo) continue;
        advance_to(frame->t);
        out.counters.vo_frames++;
        if (prev_frame) {
          const OdomDelta delta = vo_step(*prev_frame, *frame, vo_params);
          if (delta.valid && ekf.has_vo_clone()) {
            out.reports.push_back(ekf.update_vo(delta));
            out.counters.vo_updates++;
          } else {
            out.counters.vo_invalid++;
          }
        }
        // Every frame becomes the reference for the next delta, keyed to
        // the fused pose after this frame's own update.
        ekf.reset_vo_clone();
        prev_frame = *frame;
      } else if (const auto* fix = std::get_if<GnssFix>(&rec)) {
        if (!config.enable_gnss) continue;
        advance_to(fix->t);
        if (fix->mode == GnssMode::no_fix) {
          // Never fused and never reported: indoor outages leave no trace
          // in the gating diagnostics.
          out.counters.gnss_no_fix_skipped++;
          continue;
        }
        Vec3 z;
        Mat3 R;
        fix_to_local(*fix, log.header.datum, z, R);
        out.reports.push_back(ekf.update_gnss(z, R));
        out.counters.gnss_updates++;
      } else if (const auto* truth = std::get_if<GroundTruth>(&rec)) {
        out.truth.push_back(*truth);
      }
    }
    if (group_has_imu) {
      out.states.push_back(ekf.state());
      // The row's timestamp is the IMU record's time even when no predict
      // has run yet (the very first row of a log that starts later than
      // the initialization record).
      out.states.back().t = pending_imu->t;
      out.position_covs.push_back(ekf.position_covariance());
    }
  }

  MMS_INFO("run_filter: " << out.states.size() << " states, " << out.reports.size()
                          << " measurement reports, " << out.counters.predicts << " predicts");
  return out;
}

}  // namespace mms
