#include "doctest.h"

#include <cmath>

#include "mms/errors.hpp"
#include "mms/geometry.hpp"
#include "mms/random.hpp"

#include "oracles.hpp"

using namespace mms;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kCases = 1000;
constexpr double kTol = 1e-8;

// Random unit quaternion with rotation angle bounded away from pi so that
// log/exp round trips stay in the principal branch.
Quat random_quat(GaussianSampler& rng, double max_angle = 3.0) {
  Vec3 axis = rng.sample_vec3();
  while (axis.norm() < 1e-6) axis = rng.sample_vec3();
  const double angle = (2.0 * rng.uniform01() - 1.0) * max_angle;
  return quat_from_axis_angle(axis.normalized(), angle);
}

Vec3 random_vec(GaussianSampler& rng, double scale = 1.0) {
  return scale * rng.sample_vec3();
}

double matrix_diff(const Mat3& a, const Mat3& b) { return (a - b).cwiseAbs().maxCoeff(); }

Mat3 oracle_matrix(const Quat& q) { return oracle::dcm_from_quat(q.w, q.x, q.y, q.z); }

Pose3 random_pose(GaussianSampler& rng) {
  Pose3 p;
  p.rotation = random_quat(rng);
  p.translation = random_vec(rng, 2.0);
  return p;
}

double pose_diff(const Pose3& a, const Pose3& b) {
  return std::max((a.translation - b.translation).norm(), quat_angle_between(a.rotation, b.rotation));
}

}  // namespace

TEST_CASE("quaternion product and rotation agree with direction-cosine matrices") {
  GaussianSampler rng(101);
  for (int i = 0; i < kCases; ++i) {
    const Quat a = random_quat(rng);
    const Quat b = random_quat(rng);
    const Vec3 v = random_vec(rng, 3.0);

    // Hamilton product corresponds to matrix product in the same order.
    CHECK(matrix_diff(quat_to_matrix(quat_mul(a, b)), oracle_matrix(a) * oracle_matrix(b)) < kTol);
    // rotate() matches the matrix route.
    CHECK((rotate(a, v) - oracle_matrix(a) * v).norm() < kTol);
    // Conjugate is the inverse rotation.
    CHECK((rotate(quat_conjugate(a), rotate(a, v)) - v).norm() < kTol);
  }
}

TEST_CASE("quaternion matrix conversions round trip") {
  GaussianSampler rng(102);
  for (int i = 0; i < kCases; ++i) {
    const Quat q = random_quat(rng);
    const Mat3 m = quat_to_matrix(q);
    // Orthonormal with determinant +1.
    CHECK(matrix_diff(m * m.transpose(), Mat3::Identity()) < kTol);
    CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    // Back-conversion reproduces the same rotation.
    CHECK(quat_angle_between(quat_from_matrix(m), q) < kTol);
  }
}

TEST_CASE("exp and log round trip on the principal branch") {
  GaussianSampler rng(103);
  for (int i = 0; i < kCases; ++i) {
    Vec3 theta = random_vec(rng);
    // Keep |theta| in (0, pi) with margin for the near-pi guard.
    const double target = 1e-4 + rng.uniform01() * (kPi - 1e-3);
    if (theta.norm() < 1e-12) theta = Vec3(1, 0, 0);
    theta = theta.normalized() * target;

    const Quat q = quat_exp(theta);
    CHECK((quat_log(q) - theta).norm() < kTol);
    CHECK(quat_angle(q) == doctest::Approx(target).epsilon(1e-9));

    const Quat p = random_quat(rng);
    CHECK(quat_angle_between(quat_exp(quat_log(p)), p) < kTol);
  }
  // Tiny angles take the series path and still round trip.
  const Vec3 tiny(1e-9, -2e-9, 5e-10);
  CHECK((quat_log(quat_exp(tiny)) - tiny).norm() < 1e-15);
  // Zero maps to identity and back.
  CHECK(quat_log(quat_identity()).norm() == 0.0);
}

TEST_CASE("log throws where the axis is ill-defined") {
  const Vec3 axis = Vec3(1.0, 2.0, -0.5).normalized();
  CHECK_THROWS_AS((void)quat_log(quat_from_axis_angle(axis, kPi - 1e-8)), Error);
  CHECK_NOTHROW((void)quat_log(quat_from_axis_angle(axis, kPi - 1e-3)));
  try {
    (void)quat_log(quat_from_axis_angle(axis, kPi - 1e-8));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::angle_near_pi);
  }
}

TEST_CASE("normalize forces unit length and a nonnegative scalar part") {
  GaussianSampler rng(104);
  for (int i = 0; i < kCases; ++i) {
    Quat raw;
    raw.w = rng.sample();
    raw.x = rng.sample();
    raw.y = rng.sample();
    raw.z = rng.sample();
    if (std::abs(raw.w) + std::abs(raw.x) + std::abs(raw.y) + std::abs(raw.z) < 1e-9) continue;
    const Quat q = quat_normalize(raw);
    const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.w >= 0.0);
    // Same rotation as the (sign-fixed) input.
    const double s = raw.w < 0.0 ? -1.0 : 1.0;
    const double rn = std::sqrt(raw.w * raw.w + raw.x * raw.x + raw.y * raw.y + raw.z * raw.z);
    CHECK(q.w == doctest::Approx(s * raw.w / rn).epsilon(1e-9));
  }
}

TEST_CASE("axis-angle constructors match the Rodrigues formula") {
  GaussianSampler rng(105);
  for (int i = 0; i < kCases; ++i) {
    Vec3 axis = rng.sample_vec3();
    if (axis.norm() < 1e-6) axis = Vec3(0, 0, 1);
    axis.normalize();
    const double angle = (2.0 * rng.uniform01() - 1.0) * 3.0;
    CHECK(matrix_diff(quat_to_matrix(quat_from_axis_angle(axis, angle)),
                      oracle::dcm_from_axis_angle(axis, angle)) < kTol);
  }
  const double yaw = 0.73;
  CHECK(quat_angle_between(quat_from_yaw(yaw), quat_from_axis_angle(Vec3(0, 0, 1), yaw)) < kTol);
}

TEST_CASE("geodesic distance and slerp behave on the sphere") {
  GaussianSampler rng(106);
  for (int i = 0; i < kCases; ++i) {
    const Quat a = random_quat(rng);
    Vec3 v = rng.sample_vec3();
    if (v.norm() < 1e-9) v = Vec3(1, 0, 0);
    const double angle = 1e-3 + rng.uniform01() * (kPi - 2e-3);
    const Quat b = quat_mul(a, quat_exp(v.normalized() * angle));

    CHECK(quat_angle_between(a, b) == doctest::Approx(angle).epsilon(1e-7));
    CHECK(quat_angle_between(quat_slerp(a, b, 0.0), a) < 1e-7);
    CHECK(quat_angle_between(quat_slerp(a, b, 1.0), b) < 1e-7);
    // The midpoint sits at half the angular distance from both ends.
    const Quat mid = quat_slerp(a, b, 0.5);
    CHECK(quat_angle_between(a, mid) == doctest::Approx(angle / 2.0).epsilon(1e-6));
    CHECK(quat_angle_between(mid, b) == doctest::Approx(angle / 2.0).epsilon(1e-6));
  }
}

TEST_CASE("skew matrix reproduces the cross product") {
  GaussianSampler rng(107);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rng.sample_vec3();
    const Vec3 u = rng.sample_vec3();
    CHECK((skew(v) * u - v.cross(u)).norm() < 1e-12);
  }
}

TEST_CASE("rotation Jacobians satisfy their defining expansions") {
  GaussianSampler rng(108);
  for (int i = 0; i < 200; ++i) {
    Vec3 theta = rng.sample_vec3();
    if (theta.norm() >= 3.0) theta *= 3.0 / theta.norm();
    if (theta.norm() < 1e-4) theta = Vec3(0.1, -0.2, 0.15);

    // Inverses actually invert.
    CHECK(matrix_diff(so3_left_jacobian(theta) * so3_left_jacobian_inv(theta), Mat3::Identity()) <
          1e-9);
    CHECK(matrix_diff(so3_right_jacobian(theta) * so3_right_jacobian_inv(theta),
                      Mat3::Identity()) < 1e-9);
    // Right Jacobian is the left one at the negated argument.
    CHECK(matrix_diff(so3_right_jacobian(theta), so3_left_jacobian(-theta)) < 1e-12);

    // Defining property: Exp(theta + d) == Exp(theta) * Exp(Jr(theta) d) to
    // first order.
    const Vec3 d = rng.sample_vec3() * 1e-5;
    const Quat lhs = quat_exp(theta + d);
    const Quat rhs = quat_mul(quat_exp(theta), quat_exp(so3_right_jacobian(theta) * d));
    CHECK(quat_angle_between(lhs, rhs) < 1e-9);
    // And the left expansion: Exp(theta + d) == Exp(Jl(theta) d) * Exp(theta).
    const Quat rhs_l = quat_mul(quat_exp(so3_left_jacobian(theta) * d), quat_exp(theta));
    CHECK(quat_angle_between(lhs, rhs_l) < 1e-9);
  }
}

TEST_CASE("pose composition satisfies group axioms") {
  GaussianSampler rng(109);
  for (int i = 0; i < kCases; ++i) {
    const Pose3 a = random_pose(rng);
    const Pose3 b = random_pose(rng);
    const Pose3 c = random_pose(rng);
    const Vec3 v = random_vec(rng, 3.0);

    // Composition applied to a point equals sequential application.
    CHECK((pose_apply(pose_compose(a, b), v) - pose_apply(a, pose_apply(b, v))).norm() < kTol);
    // Associativity.
    CHECK(pose_diff(pose_compose(pose_compose(a, b), c), pose_compose(a, pose_compose(b, c))) <
          kTol);
    // Inverse composes to identity, in both orders.
    CHECK(pose_diff(pose_compose(a, pose_inverse(a)), pose_identity()) < kTol);
    CHECK(pose_diff(pose_compose(pose_inverse(a), a), pose_identity()) < kTol);
  }
}

TEST_CASE("se3 exp and log round trip") {
  GaussianSampler rng(110);
  for (int i = 0; i < kCases; ++i) {
    Tangent6 xi;
    xi.rho = random_vec(rng, 2.0);
    Vec3 axis = rng.sample_vec3();
    if (axis.norm() < 1e-9) axis = Vec3(1, 0, 0);
    xi.theta = axis.normalized() * (1e-4 + rng.uniform01() * (kPi - 1e-3));

    const Pose3 p = se3_exp(xi);
    const Tangent6 back = se3_log(p);
    CHECK((back.rho - xi.rho).norm() < 1e-7);
    CHECK((back.theta - xi.theta).norm() < 1e-7);

    // Round trip the other way from a random pose.
    const Pose3 q = random_pose(rng);
    CHECK(pose_diff(se3_exp(se3_log(q)), q) < 1e-7);
  }
  // Pure translation stays a translation.
  Tangent6 flat;
  flat.rho = Vec3(1.0, -2.0, 3.0);
  const Pose3 p = se3_exp(flat);
  CHECK((p.translation - flat.rho).norm() < 1e-12);
  CHECK(quat_angle(p.rotation) < 1e-12);
}

TEST_CASE("tangent vector packing round trips") {
  Tangent6 t;
  t.rho = Vec3(1, 2, 3);
  t.theta = Vec3(-4, 5, -6);
  const Vec6 v = tangent_to_vec(t);
  CHECK(v(0) == 1.0);
  CHECK(v(3) == -4.0);
  const Tangent6 back = vec_to_tangent(v);
  CHECK((back.rho - t.rho).norm() == 0.0);
  CHECK((back.theta - t.theta).norm() == 0.0);
}

TEST_CASE("adjoint transports tangents across conjugation") {
  GaussianSampler rng(111);
  for (int i = 0; i < 300; ++i) {
    const Pose3 T = random_pose(rng);
    Tangent6 xi;
    xi.rho = random_vec(rng, 0.5);
    xi.theta = random_vec(rng, 0.5);
    if (xi.theta.norm() > 2.5) xi.theta *= 2.5 / xi.theta.norm();

    // Exp(Ad_T xi) == T Exp(xi) T^-1.
    const Vec6 mapped = se3_adjoint(T) * tangent_to_vec(xi);
    const Pose3 lhs = se3_exp(vec_to_tangent(mapped));
    const Pose3 rhs = pose_compose(T, pose_compose(se3_exp(xi), pose_inverse(T)));
    CHECK(pose_diff(lhs, rhs) < 1e-7);
  }
}

TEST_CASE("se3 right Jacobian inverse matches the group expansion") {
  GaussianSampler rng(112);
  for (int i = 0; i < 200; ++i) {
    Tangent6 xi;
    xi.rho = random_vec(rng, 1.0);
    xi.theta = random_vec(rng, 0.6);
    if (xi.theta.norm() > 2.8) xi.theta *= 2.8 / xi.theta.norm();

    // Defining property: Log(Exp(xi) Exp(d)) == xi + Jr^-1(xi) d to first
    // order, so Jr^-1 maps a right increment into a tangent increment.
    Vec6 d;
    for (int k = 0; k < 6; ++k) d(k) = rng.sample();
    d *= 1e-6 / d.norm();

    const Pose3 bumped = pose_compose(se3_exp(xi), se3_exp(vec_to_tangent(d)));
    const Vec6 lhs = tangent_to_vec(se3_log(bumped)) - tangent_to_vec(xi);
    const Vec6 rhs = se3_right_jacobian_inv(xi) * d;
    CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, rhs.norm() / 1e-6));
  }
}
