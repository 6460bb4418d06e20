#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mms/geodesy.hpp"
#include "mms/records.hpp"
#include "mms/vo.hpp"

namespace mms {

using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;

/// Initial standard deviations (stored squared on the diagonal of P).
struct EkfInitCov {
  double pos = 1.0;                  // m^2
  double vel = 0.1;                  // (m/s)^2
  double att = 0.0076154354947;      // rad^2 == (5 degrees)^2
  double gyro_bias = 1e-4;           // (0.01 rad/s)^2
  double accel_bias = 1e-2;          // (0.1 m/s^2)^2
};

/// Per-sample noise at the nominal IMU rate. Kept in per-sample form (not
/// spectral densities) so a simulator and filter configured from the same
/// numbers agree exactly about the discrete-time noise covariance.
struct EkfProcessNoise {
  double gyro_white_sigma = 0.005;      // rad/s
  double gyro_bias_walk_sigma = 1e-5;   // rad/s per step
  double accel_white_sigma = 0.05;      // m/s^2
  double accel_bias_walk_sigma = 1e-4;  // m/s^2 per step
};

struct EkfConfig {
  EkfInitCov init_cov;
  EkfProcessNoise process;
  double gate_confidence = 0.997;  // supported: 0.95, 0.99, 0.997
  double declination_rad = 0.0;
  Vec3 mag_world_field = Vec3(0.0, 0.22, -0.42);  // gauss, ENU; sets yaw noise scale
  double mag_sigma_gauss = 0.005;     // per-axis field noise, for the yaw variance
  double min_mag_field_gauss = 0.05;  // weaker fields are rejected as disturbed
  double vo_cov_scale = 1.0;          // inflation on reported VO covariances
  double gravity = 9.80665;           // m/s^2
};

struct MeasurementReport {
  enum class Kind { gnss, vo, mag };
  double t = 0.0;
  Kind kind = Kind::gnss;
  Eigen::VectorXd innovation;
  double mahalanobis_d2 = 0.0;
  bool accepted = false;
  int dof = 0;
};

const char* measurement_kind_name(MeasurementReport::Kind k);

/// Chi-square acceptance threshold; supported dof: 1, 3, 6.
double chi2_gate(int dof, double confidence);

struct GateResult {
  double d2 = 0.0;
  bool accepted = false;
};

/// Mahalanobis gate: d2 = innovation' * S^-1 * innovation, accepted iff
/// d2 <= chi2_gate(dof, confidence). Throws SingularInnovationCov.
GateResult gate(const Eigen::VectorXd& innovation, const Eigen::MatrixXd& S, int dof,
                double confidence = 0.997);

/// Error-state EKF over [position, velocity, attitude, gyro bias, accel
/// bias]; attitude error is a local (right) perturbation q_true = q * Exp(dt).
/// IMU samples drive prediction; GNSS position, VO relative pose, and
/// magnetometer yaw arrive as updates. Single-owner state machine: records
/// must be applied in timestamp order by one caller.
class Ekf {
 public:
  // Error-vector block offsets.
  static constexpr int kP = 0;
  static constexpr int kV = 3;
  static constexpr int kTh = 6;
  static constexpr int kBg = 9;
  static constexpr int kBa = 12;

  Ekf(const NavState& init, const EkfConfig& config);

  const NavState& state() const { return x_; }
  const Mat15& covariance() const { return P_; }
  Mat3 position_covariance() const { return P_.block<3, 3>(kP, kP); }
  const EkfConfig& config() const { return cfg_; }

  /// Strapdown mechanization plus covariance propagation with the exact
  /// discrete transition of that mechanization. Throws BadDt unless
  /// 0 < dt <= 0.1 s.
  void predict(const ImuSample& imu, double dt);

  /// Absolute position update (measurement from fix_to_local).
  MeasurementReport update_gnss(const Vec3& position, const Mat3& covariance);

  /// Relative-pose update against the stored reference pose (the fused pose
  /// at the previous camera frame). Throws InvalidDelta when the delta is
  /// unusable or no reference has been stored yet. Call reset_vo_clone()
  /// after every frame to re-key the reference.
  MeasurementReport update_vo(const OdomDelta& delta);

  /// Scalar yaw update from a tilt-compensated magnetometer reading.
  /// Throws FieldTooWeak below the configured field floor.
  MeasurementReport update_mag(const MagSample& mag);

  /// Stores the current pose (with its covariance and cross-covariance) as
  /// the reference for the next relative-pose update.
  void reset_vo_clone();
  bool has_vo_clone() const { return has_clone_; }
  const Pose3& vo_clone_pose() const { return clone_pose_; }

  /// Nominal-state propagation and its exact discrete error transition,
  /// exposed for direct verification against finite differences.
  static NavState propagate_nominal(const NavState& s, const ImuSample& imu, double dt,
                                    double gravity);
  static Mat15 transition_matrix(const NavState& s, const ImuSample& imu, double dt);

 private:
  void inject(const Vec15& dx);
  void symmetrize();
  MeasurementReport linear_update(const Eigen::MatrixXd& H, const Eigen::VectorXd& innovation,
                                  const Eigen::MatrixXd& R, int dof, MeasurementReport::Kind kind);

  NavState x_;
  Mat15 P_ = Mat15::Zero();
  EkfConfig cfg_;

  // VO reference ("clone"): pose at the previous camera frame, its 6x6
  // covariance, and the 6x15 cross-covariance against the current error
  // state. The cross term is propagated through every predict/update so the
  // relative-pose update stays consistent.
  Pose3 clone_pose_;
  Mat6 clone_cov_ = Mat6::Zero();
  Eigen::Matrix<double, 6, 15> clone_cross_ = Eigen::Matrix<double, 6, 15>::Zero();
  bool has_clone_ = false;
};

/// Convenience constructor matching the documented defaults: velocity and
/// biases start at zero, P from config.init_cov.
Ekf ekf_init(const Vec3& p0, const Quat& q0, const EkfConfig& config);

}  // namespace mms
