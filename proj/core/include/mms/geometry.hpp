#pragma once

#include <Eigen/Core>

namespace mms {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Unit quaternion, Hamilton convention, scalar-first, active rotation.
/// World frame is ENU (x east, y north, z up); body frame is FLU
/// (x forward, y left, z up).
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Rigid transform: rotation then translation (x_world = R x_body + t).
struct Pose3 {
  Quat rotation;
  Vec3 translation = Vec3::Zero();
};

/// Minimal SE(3) parameterization: translational part first, rotational second.
struct Tangent6 {
  Vec3 rho = Vec3::Zero();    // meters
  Vec3 theta = Vec3::Zero();  // radians
};

// ---- Quaternion algebra ----------------------------------------------------

Quat quat_identity();

/// Renormalizes to unit length and forces w >= 0 (the two signs denote the
/// same rotation; a fixed sign keeps serialized output reproducible).
Quat quat_normalize(const Quat& q);

Quat quat_conjugate(const Quat& q);

/// Hamilton product a*b: rotate by b first, then by a.
Quat quat_mul(const Quat& a, const Quat& b);

Vec3 rotate(const Quat& q, const Vec3& v);

Mat3 quat_to_matrix(const Quat& q);

/// Robust matrix-to-quaternion conversion (largest-pivot variant).
Quat quat_from_matrix(const Mat3& m);

/// Exponential map: rotation vector (axis * angle, radians) to quaternion.
Quat quat_exp(const Vec3& theta);

/// Logarithm map to a rotation vector with angle in [0, pi).
/// Throws AngleNearPi within 1e-6 rad of pi, where the axis is ill-defined.
Vec3 quat_log(const Quat& q);

Quat quat_from_axis_angle(const Vec3& axis, double angle_rad);

/// Rotation about world z (heading); convenience for planar trajectories.
Quat quat_from_yaw(double yaw_rad);

/// Rotation angle in [0, pi] taking q1 to q2 (geodesic distance on SO(3)).
double quat_angle_between(const Quat& a, const Quat& b);

/// Shortest-arc spherical interpolation, u in [0, 1]; u=0 gives a, u=1
/// gives b (up to sign normalization). Falls back to normalized linear
/// interpolation for nearly identical rotations.
Quat quat_slerp(const Quat& a, const Quat& b, double u);

/// Rotation angle of q itself, in [0, pi].
double quat_angle(const Quat& q);

// ---- SO(3) Jacobians -------------------------------------------------------

/// Cross-product matrix: skew(v) * u = v x u.
Mat3 skew(const Vec3& v);

/// Left Jacobian of SO(3): d/dtheta of exp, integrates body rates into the
/// translation coupling of the SE(3) exponential.
Mat3 so3_left_jacobian(const Vec3& theta);
Mat3 so3_left_jacobian_inv(const Vec3& theta);
Mat3 so3_right_jacobian(const Vec3& theta);    // Jr(theta) = Jl(-theta)
Mat3 so3_right_jacobian_inv(const Vec3& theta);

// ---- SE(3) -----------------------------------------------------------------

Pose3 pose_identity();
Pose3 pose_compose(const Pose3& a, const Pose3& b);
Pose3 pose_inverse(const Pose3& a);

/// Applies the transform to a point: rotation * p + translation.
Vec3 pose_apply(const Pose3& a, const Vec3& p);

Pose3 se3_exp(const Tangent6& t);
Tangent6 se3_log(const Pose3& p);  // throws AngleNearPi like quat_log

Vec6 tangent_to_vec(const Tangent6& t);
Tangent6 vec_to_tangent(const Vec6& v);

/// Adjoint of a pose under (rho, theta) ordering:
///   Exp(Ad_T * xi) = T * Exp(xi) * T^-1.
Mat6 se3_adjoint(const Pose3& p);

/// Inverse right Jacobian of the SE(3) exponential at tangent xi, used by the
/// pose-graph solver to turn residual perturbations into state perturbations.
Mat6 se3_right_jacobian_inv(const Tangent6& xi);

}  // namespace mms
