#include "mms/ekf.hpp"

#include <cmath>
#include <string>

#include "mms/errors.hpp"
#include "mms/logging.hpp"

namespace mms {
namespace {

constexpr double kMaxPredictDt = 0.1;  // s; larger gaps indicate a broken log
constexpr double kFdStep = 1e-6;      // central-difference step for measurement Jacobians

double wrap_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// ZYX yaw of a world-from-body rotation (heading east of the ENU y axis
// as seen from +x toward +y, i.e. standard atan2 form).
double yaw_of(const Quat& q) {
  return std::atan2(2.0 * (q.w * q.z + q.x * q.y), 1.0 - 2.0 * (q.y * q.y + q.z * q.z));
}

double pitch_of(const Quat& q) {
  double s = 2.0 * (q.w * q.y - q.x * q.z);
  s = std::max(-1.0, std::min(1.0, s));
  return std::asin(s);
}

double roll_of(const Quat& q) {
  return std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y));
}

}  // namespace

const char* measurement_kind_name(MeasurementReport::Kind k) {
  switch (k) {
    case MeasurementReport::Kind::gnss:
      return "gnss";
    case MeasurementReport::Kind::vo:
      return "vo";
    case MeasurementReport::Kind::mag:
      return "mag";
  }
  return "unknown";
}

double chi2_gate(int dof, double confidence) {
  // Pinned thresholds for the three supported confidence rows. The 0.997
  // row follows the 3-sigma convention used in the field (slightly above
  // the exact 0.997 quantile); the unit tests check each value's actual
  // coverage against an independent chi-square CDF.
  struct Row {
    double conf;
    double d1, d3, d6;
  };
  static constexpr Row rows[] = {
      {0.95, 3.841458820694124, 7.814727903251179, 12.591587243743977},
      {0.99, 6.6348966010212145, 11.344866730144373, 16.811893829770927},
      {0.997, 8.81, 14.16, 20.06},
  };
  for (const Row& r : rows) {
    if (std::abs(confidence - r.conf) < 1e-9) {
      if (dof == 1) return r.d1;
      if (dof == 3) return r.d3;
      if (dof == 6) return r.d6;
      raise(Errc::config_error, "chi2_gate: unsupported dof " + std::to_string(dof));
    }
  }
  raise(Errc::config_error,
        "chi2_gate: unsupported confidence " + std::to_string(confidence) +
            " (supported: 0.95, 0.99, 0.997)");
}

GateResult gate(const Eigen::VectorXd& innovation, const Eigen::MatrixXd& S, int dof,
                double confidence) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const Eigen::VectorXd w = ldlt.solve(innovation);
  const double d2 = innovation.dot(w);
  if (ldlt.info() != Eigen::Success || !std::isfinite(d2) || d2 < 0.0) {
    raise(Errc::singular_innovation_cov, "gate: innovation covariance is not positive definite");
  }
  GateResult r;
  r.d2 = d2;
  r.accepted = d2 <= chi2_gate(dof, confidence);
  return r;
}

Ekf::Ekf(const NavState& init, const EkfConfig& config) : x_(init), cfg_(config) {
  x_.orientation = quat_normalize(x_.orientation);
  P_.setZero();
  P_.block<3, 3>(kP, kP) = Mat3::Identity() * cfg_.init_cov.pos;
  P_.block<3, 3>(kV, kV) = Mat3::Identity() * cfg_.init_cov.vel;
  P_.block<3, 3>(kTh, kTh) = Mat3::Identity() * cfg_.init_cov.att;
  P_.block<3, 3>(kBg, kBg) = Mat3::Identity() * cfg_.init_cov.gyro_bias;
  P_.block<3, 3>(kBa, kBa) = Mat3::Identity() * cfg_.init_cov.accel_bias;
}

Ekf ekf_init(const Vec3& p0, const Quat& q0, const EkfConfig& config) {
  NavState s;
  s.t = 0.0;
  s.position = p0;
  s.velocity = Vec3::Zero();
  s.orientation = quat_normalize(q0);
  s.gyro_bias = Vec3::Zero();
  s.accel_bias = Vec3::Zero();
  return Ekf(s, config);
}

NavState Ekf::propagate_nominal(const NavState& s, const ImuSample& imu, double dt,
                                double gravity) {
  const Vec3 omega = imu.gyro - s.gyro_bias;
  const Vec3 accel_body = imu.accel - s.accel_bias;
  const Vec3 g(0.0, 0.0, -gravity);
  const Vec3 accel_world = rotate(s.orientation, accel_body) + g;

  NavState out = s;
  out.t = s.t + dt;
  out.position = s.position + s.velocity * dt + 0.5 * accel_world * dt * dt;
  out.velocity = s.velocity + accel_world * dt;
  out.orientation = quat_normalize(quat_mul(s.orientation, quat_exp(omega * dt)));
  return out;
}

Mat15 Ekf::transition_matrix(const NavState& s, const ImuSample& imu, double dt) {
  const Vec3 omega = imu.gyro - s.gyro_bias;
  const Vec3 accel_body = imu.accel - s.accel_bias;
  const Mat3 R = quat_to_matrix(s.orientation);
  const Vec3 dtheta = omega * dt;

  Mat15 F = Mat15::Identity();
  F.block<3, 3>(kP, kV) = Mat3::Identity() * dt;
  F.block<3, 3>(kP, kTh) = -0.5 * R * skew(accel_body) * dt * dt;
  F.block<3, 3>(kP, kBa) = -0.5 * R * dt * dt;
  F.block<3, 3>(kV, kTh) = -R * skew(accel_body) * dt;
  F.block<3, 3>(kV, kBa) = -R * dt;
  F.block<3, 3>(kTh, kTh) = quat_to_matrix(quat_exp(dtheta)).transpose();
  F.block<3, 3>(kTh, kBg) = -so3_right_jacobian(dtheta) * dt;
  return F;
}

void Ekf::predict(const ImuSample& imu, double dt) {
  if (!(dt > 0.0) || dt > kMaxPredictDt) {
    raise(Errc::bad_dt, "predict: dt = " + std::to_string(dt) + " outside (0, " +
                            std::to_string(kMaxPredictDt) + "] s");
  }
  const Mat15 F = transition_matrix(x_, imu, dt);

  // Noise input [gyro white, accel white, gyro-bias walk, accel-bias walk];
  // the white-noise columns mirror the corresponding bias columns of F.
  const Vec3 dtheta = (imu.gyro - x_.gyro_bias) * dt;
  const Mat3 R = quat_to_matrix(x_.orientation);
  Eigen::Matrix<double, 15, 12> G = Eigen::Matrix<double, 15, 12>::Zero();
  G.block<3, 3>(kTh, 0) = -so3_right_jacobian(dtheta) * dt;
  G.block<3, 3>(kP, 3) = -0.5 * R * dt * dt;
  G.block<3, 3>(kV, 3) = -R * dt;
  G.block<3, 3>(kBg, 6) = Mat3::Identity();
  G.block<3, 3>(kBa, 9) = Mat3::Identity();

  Eigen::Matrix<double, 12, 12> Q = Eigen::Matrix<double, 12, 12>::Zero();
  const auto& pn = cfg_.process;
  Q.block<3, 3>(0, 0) = Mat3::Identity() * pn.gyro_white_sigma * pn.gyro_white_sigma;
  Q.block<3, 3>(3, 3) = Mat3::Identity() * pn.accel_white_sigma * pn.accel_white_sigma;
  Q.block<3, 3>(6, 6) = Mat3::Identity() * pn.gyro_bias_walk_sigma * pn.gyro_bias_walk_sigma;
  Q.block<3, 3>(9, 9) = Mat3::Identity() * pn.accel_bias_walk_sigma * pn.accel_bias_walk_sigma;

  x_ = propagate_nominal(x_, imu, dt, cfg_.gravity);
  P_ = F * P_ * F.transpose() + G * Q * G.transpose();
  symmetrize();
  if (has_clone_) {
    clone_cross_ = (clone_cross_ * F.transpose()).eval();
  }
}

void Ekf::inject(const Vec15& dx) {
  x_.position += dx.segment<3>(kP);
  x_.velocity += dx.segment<3>(kV);
  x_.orientation = quat_normalize(quat_mul(x_.orientation, quat_exp(dx.segment<3>(kTh))));
  x_.gyro_bias += dx.segment<3>(kBg);
  x_.accel_bias += dx.segment<3>(kBa);
}

void Ekf::symmetrize() { P_ = (0.5 * (P_ + P_.transpose())).eval(); }

MeasurementReport Ekf::linear_update(const Eigen::MatrixXd& H, const Eigen::VectorXd& innovation,
                                     const Eigen::MatrixXd& R, int dof,
                                     MeasurementReport::Kind kind) {
  const Eigen::MatrixXd S = H * P_ * H.transpose() + R;
  const GateResult g = gate(innovation, S, dof, cfg_.gate_confidence);

  MeasurementReport report;
  report.t = x_.t;
  report.kind = kind;
  report.innovation = innovation;
  report.mahalanobis_d2 = g.d2;
  report.accepted = g.accepted;
  report.dof = dof;
  if (!g.accepted) {
    MMS_DEBUG("update " << measurement_kind_name(kind) << " t=" << x_.t
                        << " rejected: d2=" << g.d2);
    return report;
  }

  Eigen::MatrixXd K = Eigen::LDLT<Eigen::MatrixXd>(S).solve(H * P_).transpose();
  const Mat15 ikh = Mat15::Identity() - K * H;
  P_ = ikh * P_ * ikh.transpose() + K * R * K.transpose();
  symmetrize();
  if (has_clone_) {
    clone_cross_ = (clone_cross_ * ikh.transpose()).eval();
  }
  inject(K * innovation);
  return report;
}

MeasurementReport Ekf::update_gnss(const Vec3& position, const Mat3& covariance) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 15);
  H.block<3, 3>(0, kP) = Mat3::Identity();
  const Eigen::VectorXd innovation = position - x_.position;
  return linear_update(H, innovation, covariance, 3, MeasurementReport::Kind::gnss);
}

MeasurementReport Ekf::update_mag(const MagSample& mag) {
  const double field_norm = mag.field.norm();
  if (field_norm < cfg_.min_mag_field_gauss) {
    raise(Errc::field_too_weak, "update_mag: field " + std::to_string(field_norm) +
                                    " gauss below floor " +
                                    std::to_string(cfg_.min_mag_field_gauss));
  }
  const double horiz = std::hypot(cfg_.mag_world_field.x(), cfg_.mag_world_field.y());
  if (horiz < 1e-9) {
    raise(Errc::config_error, "update_mag: configured world field has no horizontal component");
  }

  // Tilt compensation: rotate the body-frame reading by the estimated roll
  // and pitch only, leaving a field vector in a yaw-free level frame. The
  // configured field's own east-of-north angle plus any extra declination
  // offset maps magnetic heading to grid heading.
  //
  // Because the leveling uses the *estimated* roll and pitch, the measured
  // yaw is itself a function of the attitude estimate: when the vertical
  // field component is large, a tilt error leaks into the derived heading.
  // The whole residual is therefore differentiated as one function of the
  // attitude error, so the filter attributes that leakage to roll/pitch
  // uncertainty instead of swallowing it as sharp yaw information.
  const double ref_angle =
      std::atan2(cfg_.mag_world_field.x(), cfg_.mag_world_field.y()) + cfg_.declination_rad;
  const auto residual = [&](const Vec3& dth) -> double {
    const Quat q = quat_mul(x_.orientation, quat_exp(dth));
    const Quat level = quat_mul(quat_from_axis_angle(Vec3::UnitY(), pitch_of(q)),
                                quat_from_axis_angle(Vec3::UnitX(), roll_of(q)));
    const Vec3 leveled = rotate(level, mag.field);
    const double yaw_measured = std::atan2(leveled.x(), leveled.y()) - ref_angle;
    return wrap_pi(yaw_measured - yaw_of(q));
  };

  const double yaw_sigma = cfg_.mag_sigma_gauss / horiz;
  const double R = yaw_sigma * yaw_sigma;

  // The residual shrinks as the attitude error is corrected, so its
  // derivative enters the measurement row with a minus sign; position,
  // velocity, and bias errors do not enter the measurement.
  const auto jacobian_at = [&](const Vec3& dth) -> Eigen::RowVector3d {
    Eigen::RowVector3d J;
    for (int j = 0; j < 3; ++j) {
      Vec3 step = Vec3::Zero();
      step(j) = kFdStep;
      J(j) = -wrap_pi(residual(dth + step) - residual(dth - step)) / (2.0 * kFdStep);
    }
    return J;
  };

  // What this scalar pins down is the heading. Its sensitivity to roll and
  // pitch exists only because the leveling step reuses the estimated tilt,
  // so the row is handled as a consider update: the gain is forbidden from
  // correcting roll and pitch, while the covariance bookkeeping keeps the
  // full row. Letting the gain touch tilt would allow tens of
  // near-parallel scalars per second to "triangulate" roll and pitch, and
  // the small linearization errors those terms carry turn the
  // triangulation into confident nonsense: the tilt estimate slides many
  // of its own stated sigma away while the heading residual stays
  // centered, and the gravity misalignment that follows can run the whole
  // filter off. Keeping the tilt terms in the covariance update matters
  // just as much: a tilt error is constant across consecutive samples, not
  // fresh noise, and the cross-covariance the full row records between the
  // heading correction and the tilt error stops the next sample from
  // counting the same leakage as independent evidence. Without that memory
  // a large initial tilt walks the heading the full leakage distance
  // within a handful of samples while its stated sigma collapses.
  const Eigen::RowVector3d J = jacobian_at(Vec3::Zero());
  const double S = (J * P_.block<3, 3>(kTh, kTh) * J.transpose())(0) + R;

  MeasurementReport report;
  report.t = x_.t;
  report.kind = MeasurementReport::Kind::mag;
  report.innovation = Eigen::VectorXd(1);
  report.innovation(0) = residual(Vec3::Zero());
  report.dof = 1;
  {
    Eigen::MatrixXd S1(1, 1);
    S1(0, 0) = S;
    const GateResult g = gate(report.innovation, S1, 1, cfg_.gate_confidence);
    report.mahalanobis_d2 = g.d2;
    report.accepted = g.accepted;
  }
  if (!report.accepted) {
    MMS_DEBUG("update mag t=" << x_.t << " rejected: d2=" << report.mahalanobis_d2);
    return report;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(1, 15);
  H(0, kTh + 0) = J(0);
  H(0, kTh + 1) = J(1);
  H(0, kTh + 2) = J(2);
  Eigen::VectorXd K = P_ * H.transpose() / S;
  K(kTh + 0) = 0.0;
  K(kTh + 1) = 0.0;
  const Vec15 delta = K * report.innovation(0);

  // The symmetric update form stays exact for a gain that is not the
  // optimal one, so zeroing the tilt entries costs accuracy but never
  // consistency.
  const Mat15 ikh = Mat15::Identity() - K * H;
  P_ = ikh * P_ * ikh.transpose() + K * R * K.transpose();
  symmetrize();
  if (has_clone_) {
    clone_cross_ = (clone_cross_ * ikh.transpose()).eval();
  }
  inject(delta);
  return report;
}

void Ekf::reset_vo_clone() {
  clone_pose_.rotation = x_.orientation;
  clone_pose_.translation = x_.position;
  Eigen::Matrix<double, 6, 15> sel = Eigen::Matrix<double, 6, 15>::Zero();
  sel.block<3, 3>(0, kP) = Mat3::Identity();
  sel.block<3, 3>(3, kTh) = Mat3::Identity();
  clone_cross_ = sel * P_;
  clone_cov_ = sel * P_ * sel.transpose();
  has_clone_ = true;
}

MeasurementReport Ekf::update_vo(const OdomDelta& delta) {
  if (!delta.valid) {
    raise(Errc::invalid_delta, "update_vo: delta flagged invalid");
  }
  if (!has_clone_) {
    raise(Errc::invalid_delta, "update_vo: no reference pose stored");
  }

  // Relative pose predicted from the stored reference and the current
  // estimate, as a function of both error vectors. The errors use the same
  // local convention as the filter state: p + dp, q * Exp(dtheta).
  const auto predict_rel = [this](const Vec3& dp, const Vec3& dth, const Vec3& dpc,
                                  const Vec3& dthc) -> Pose3 {
    Pose3 cur;
    cur.translation = x_.position + dp;
    cur.rotation = quat_mul(x_.orientation, quat_exp(dth));
    Pose3 ref;
    ref.translation = clone_pose_.translation + dpc;
    ref.rotation = quat_mul(clone_pose_.rotation, quat_exp(dthc));
    return pose_compose(pose_inverse(ref), cur);
  };
  const Pose3 predicted = predict_rel(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());

  Vec6 nu;
  try {
    nu = tangent_to_vec(se3_log(pose_compose(pose_inverse(predicted), delta.delta)));
  } catch (const Error&) {
    raise(Errc::invalid_delta, "update_vo: measured delta is a half-turn away from prediction");
  }

  // Measurement Jacobians by central differences on the log-residual.
  // Only the position and attitude blocks of the state (and the reference)
  // enter the relative pose; the remaining columns are identically zero.
  const auto residual_of = [&](const Pose3& rel) -> Vec6 {
    return tangent_to_vec(se3_log(pose_compose(pose_inverse(predicted), rel)));
  };
  Eigen::MatrixXd Hx = Eigen::MatrixXd::Zero(6, 15);
  Eigen::Matrix<double, 6, 6> Hc = Eigen::Matrix<double, 6, 6>::Zero();
  for (int j = 0; j < 6; ++j) {
    Vec3 dp = Vec3::Zero(), dth = Vec3::Zero();
    if (j < 3) {
      dp(j) = kFdStep;
    } else {
      dth(j - 3) = kFdStep;
    }
    const Vec6 plus = residual_of(predict_rel(dp, dth, Vec3::Zero(), Vec3::Zero()));
    const Vec6 minus = residual_of(predict_rel(-dp, -dth, Vec3::Zero(), Vec3::Zero()));
    const Vec6 col = (plus - minus) / (2.0 * kFdStep);
    Hx.col(j < 3 ? kP + j : kTh + (j - 3)) = col;

    const Vec6 plus_c = residual_of(predict_rel(Vec3::Zero(), Vec3::Zero(), dp, dth));
    const Vec6 minus_c = residual_of(predict_rel(Vec3::Zero(), Vec3::Zero(), -dp, -dth));
    Hc.col(j) = (plus_c - minus_c) / (2.0 * kFdStep);
  }

  const Mat6 R = delta.covariance * cfg_.vo_cov_scale;
  const Eigen::MatrixXd S = Hx * P_ * Hx.transpose() + Hx * clone_cross_.transpose() * Hc.transpose() +
                            Hc * clone_cross_ * Hx.transpose() + Hc * clone_cov_ * Hc.transpose() + R;
  const GateResult g = gate(nu, S, 6, cfg_.gate_confidence);

  MeasurementReport report;
  report.t = x_.t;
  report.kind = MeasurementReport::Kind::vo;
  report.innovation = nu;
  report.mahalanobis_d2 = g.d2;
  report.accepted = g.accepted;
  report.dof = 6;
  if (!g.accepted) {
    MMS_DEBUG("update vo t=" << x_.t << " rejected: d2=" << g.d2);
    return report;
  }

  // Gain over the joint (state, reference) covariance structure.
  const Eigen::Matrix<double, 15, 6> cov_xn =
      P_ * Hx.transpose() + clone_cross_.transpose() * Hc.transpose();
  const Eigen::Matrix<double, 15, 6> K =
      Eigen::LDLT<Eigen::MatrixXd>(S).solve(cov_xn.transpose()).transpose();
  P_ -= K * S * K.transpose();
  symmetrize();
  // Keep the cross term coherent in case another update lands before the
  // reference is re-keyed (the reference estimate itself is not corrected).
  clone_cross_ = (clone_cross_ * (Mat15::Identity() - K * Hx).transpose() -
                  clone_cov_ * Hc.transpose() * K.transpose())
                     .eval();
  inject(K * nu);
  return report;
}

}  // namespace mms
