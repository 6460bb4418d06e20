#include "mms/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>

#include "mms/errors.hpp"

namespace mms {

namespace {

// Below this angle the closed-form trig ratios lose digits to cancellation
// ((1-cos)/theta^2 and friends), so Taylor series take over. 1e-4 rad keeps
// both branches accurate to ~1e-12.
constexpr double kSmallAngle = 1e-4;

// Axis of a rotation within this distance of pi is ill-conditioned for log.
constexpr double kNearPiMargin = 1e-6;

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// ---- Quaternion algebra ----------------------------------------------------

Quat quat_identity() { return Quat{1.0, 0.0, 0.0, 0.0}; }

Quat quat_normalize(const Quat& q) {
  double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  double s = 1.0 / n;
  Quat r{q.w * s, q.x * s, q.y * s, q.z * s};
  if (r.w < 0.0) {
    r.w = -r.w;
    r.x = -r.x;
    r.y = -r.y;
    r.z = -r.z;
  }
  return r;
}

Quat quat_conjugate(const Quat& q) { return Quat{q.w, -q.x, -q.y, -q.z}; }

Quat quat_mul(const Quat& a, const Quat& b) {
  Quat r;
  r.w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
  r.x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
  r.y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
  r.z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
  return quat_normalize(r);
}

Vec3 rotate(const Quat& q, const Vec3& v) {
  // v' = v + 2 w (u x v) + 2 u x (u x v), u = vector part.
  Vec3 u(q.x, q.y, q.z);
  Vec3 uxv = u.cross(v);
  return v + 2.0 * (q.w * uxv + u.cross(uxv));
}

Mat3 quat_to_matrix(const Quat& q) {
  double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

Quat quat_from_matrix(const Mat3& m) {
  // Pick the largest of the four squared components as pivot to avoid the
  // cancellation the naive trace formula suffers near 180 degree rotations.
  double t = m.trace();
  Quat q;
  if (t > m(0, 0) && t > m(1, 1) && t > m(2, 2)) {
    double s = std::sqrt(t + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (m(2, 1) - m(1, 2)) / s;
    q.y = (m(0, 2) - m(2, 0)) / s;
    q.z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    q.w = (m(2, 1) - m(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (m(0, 1) + m(1, 0)) / s;
    q.z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    q.w = (m(0, 2) - m(2, 0)) / s;
    q.x = (m(0, 1) + m(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (m(1, 2) + m(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    q.w = (m(1, 0) - m(0, 1)) / s;
    q.x = (m(0, 2) + m(2, 0)) / s;
    q.y = (m(1, 2) + m(2, 1)) / s;
    q.z = 0.25 * s;
  }
  return quat_normalize(q);
}

Quat quat_exp(const Vec3& theta) {
  double angle = theta.norm();
  double half = 0.5 * angle;
  // sin(angle/2) / angle, finite at zero.
  double k;
  if (angle < kSmallAngle) {
    k = 0.5 - angle * angle / 48.0;
  } else {
    k = std::sin(half) / angle;
  }
  Quat q{std::cos(half), k * theta.x(), k * theta.y(), k * theta.z()};
  return quat_normalize(q);
}

Vec3 quat_log(const Quat& q_in) {
  Quat q = quat_normalize(q_in);  // w >= 0, so angle lands in [0, pi]
  Vec3 v(q.x, q.y, q.z);
  double vn = v.norm();
  if (vn < kSmallAngle) {
    // angle/vn -> 2/w as vn -> 0; next series term keeps ~1e-12 accuracy.
    double w2 = q.w * q.w;
    return v * (2.0 / q.w) * (1.0 - vn * vn / (3.0 * w2));
  }
  double angle = 2.0 * std::atan2(vn, q.w);
  if (angle > kPi - kNearPiMargin) {
    raise(Errc::angle_near_pi,
          "rotation angle within 1e-6 of pi; axis ill-defined, perturb the input");
  }
  return v * (angle / vn);
}

Quat quat_from_axis_angle(const Vec3& axis, double angle_rad) {
  double n = axis.norm();
  if (n == 0.0) return quat_identity();
  return quat_exp(axis * (angle_rad / n));
}

Quat quat_from_yaw(double yaw_rad) { return quat_exp(Vec3(0.0, 0.0, yaw_rad)); }

double quat_angle(const Quat& q) {
  Quat n = quat_normalize(q);
  double vn = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
  return 2.0 * std::atan2(vn, n.w);
}

double quat_angle_between(const Quat& a, const Quat& b) {
  return quat_angle(quat_mul(quat_conjugate(a), b));
}

Quat quat_slerp(const Quat& a, const Quat& b, double u) {
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  double sign = 1.0;
  if (dot < 0.0) {  // take the short way around
    dot = -dot;
    sign = -1.0;
  }
  double wa, wb;
  if (dot > 1.0 - 1e-10) {
    wa = 1.0 - u;  // nearly parallel: linear blend, renormalized below
    wb = u;
  } else {
    const double omega = std::acos(std::min(dot, 1.0));
    const double s = std::sin(omega);
    wa = std::sin((1.0 - u) * omega) / s;
    wb = std::sin(u * omega) / s;
  }
  Quat out;
  out.w = wa * a.w + sign * wb * b.w;
  out.x = wa * a.x + sign * wb * b.x;
  out.y = wa * a.y + sign * wb * b.y;
  out.z = wa * a.z + sign * wb * b.z;
  return quat_normalize(out);
}

// ---- SO(3) Jacobians -------------------------------------------------------

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_left_jacobian(const Vec3& theta) {
  double t = theta.norm();
  double a, b;  // Jl = I + a [theta]x + b [theta]x^2
  if (t < kSmallAngle) {
    double t2 = t * t;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    double t2 = t * t;
    a = (1.0 - std::cos(t)) / t2;
    b = (t - std::sin(t)) / (t2 * t);
  }
  Mat3 s = skew(theta);
  return Mat3::Identity() + a * s + b * s * s;
}

Mat3 so3_left_jacobian_inv(const Vec3& theta) {
  double t = theta.norm();
  double c;  // Jl^-1 = I - 1/2 [theta]x + c [theta]x^2
  if (t < kSmallAngle) {
    double t2 = t * t;
    c = 1.0 / 12.0 + t2 / 720.0;
  } else {
    c = 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
  }
  Mat3 s = skew(theta);
  return Mat3::Identity() - 0.5 * s + c * s * s;
}

Mat3 so3_right_jacobian(const Vec3& theta) { return so3_left_jacobian(-theta); }

Mat3 so3_right_jacobian_inv(const Vec3& theta) { return so3_left_jacobian_inv(-theta); }

// ---- SE(3) -----------------------------------------------------------------

Pose3 pose_identity() { return Pose3{}; }

Pose3 pose_compose(const Pose3& a, const Pose3& b) {
  Pose3 r;
  r.rotation = quat_mul(a.rotation, b.rotation);
  r.translation = rotate(a.rotation, b.translation) + a.translation;
  return r;
}

Pose3 pose_inverse(const Pose3& a) {
  Pose3 r;
  r.rotation = quat_normalize(quat_conjugate(a.rotation));
  r.translation = -rotate(r.rotation, a.translation);
  return r;
}

Vec3 pose_apply(const Pose3& a, const Vec3& p) {
  return rotate(a.rotation, p) + a.translation;
}

Pose3 se3_exp(const Tangent6& t) {
  Pose3 p;
  p.rotation = quat_exp(t.theta);
  p.translation = so3_left_jacobian(t.theta) * t.rho;
  return p;
}

Tangent6 se3_log(const Pose3& p) {
  Tangent6 t;
  t.theta = quat_log(p.rotation);
  t.rho = so3_left_jacobian_inv(t.theta) * p.translation;
  return t;
}

Vec6 tangent_to_vec(const Tangent6& t) {
  Vec6 v;
  v << t.rho, t.theta;
  return v;
}

Tangent6 vec_to_tangent(const Vec6& v) {
  Tangent6 t;
  t.rho = v.head<3>();
  t.theta = v.tail<3>();
  return t;
}

Mat6 se3_adjoint(const Pose3& p) {
  Mat3 r = quat_to_matrix(p.rotation);
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = r;
  ad.topRightCorner<3, 3>() = skew(p.translation) * r;
  ad.bottomRightCorner<3, 3>() = r;
  return ad;
}

namespace {

// Translational block Q of the SE(3) left Jacobian, so that
// Jl(xi) = [ Jl(theta)  Q ; 0  Jl(theta) ].
Mat3 se3_left_jacobian_q(const Vec3& rho, const Vec3& theta) {
  double t = theta.norm();
  double c1, c2, c3;
  if (t < kSmallAngle) {
    double t2 = t * t;
    c1 = 1.0 / 6.0 - t2 / 120.0;
    c2 = 1.0 / 24.0 - t2 / 720.0;
    c3 = 1.0 / 120.0 - t2 / 2520.0;
  } else {
    double t2 = t * t;
    double t3 = t2 * t;
    double st = std::sin(t);
    double ct = std::cos(t);
    c1 = (t - st) / t3;
    c2 = (t2 + 2.0 * ct - 2.0) / (2.0 * t2 * t2);
    c3 = (2.0 * t - 3.0 * st + t * ct) / (2.0 * t2 * t3);
  }
  Mat3 rx = skew(rho);
  Mat3 tx = skew(theta);
  Mat3 q = 0.5 * rx;
  q += c1 * (tx * rx + rx * tx + tx * rx * tx);
  q += c2 * (tx * tx * rx + rx * tx * tx - 3.0 * tx * rx * tx);
  q += c3 * (tx * rx * tx * tx + tx * tx * rx * tx);
  return q;
}

Mat6 se3_left_jacobian_inv(const Tangent6& xi) {
  Mat3 jli = so3_left_jacobian_inv(xi.theta);
  Mat3 q = se3_left_jacobian_q(xi.rho, xi.theta);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = jli;
  out.topRightCorner<3, 3>() = -jli * q * jli;
  out.bottomRightCorner<3, 3>() = jli;
  return out;
}

}  // namespace

Mat6 se3_right_jacobian_inv(const Tangent6& xi) {
  Tangent6 neg;
  neg.rho = -xi.rho;
  neg.theta = -xi.theta;
  return se3_left_jacobian_inv(neg);
}

}  // namespace mms
