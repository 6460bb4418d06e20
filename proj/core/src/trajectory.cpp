#include "mms/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "mms/errors.hpp"

namespace mms {

namespace {

// 5-point Gauss-Legendre nodes/weights on [-1, 1]; exact for polynomials to
// degree 9, which makes 1 cm sub-spans of a cubic's speed integrand converge
// to machine precision.
constexpr double kGlNode[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                               -0.9061798459386640, 0.9061798459386640};
constexpr double kGlWeight[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                 0.2369268850561891, 0.2369268850561891};

constexpr double kTableResolution = 0.01;  // meters between arc-length knots
constexpr double kTimeTolerance = 1e-6;    // seconds of slack at the ends

double wrap_angle(double a) {
  while (a > 3.14159265358979323846) a -= 2.0 * 3.14159265358979323846;
  while (a <= -3.14159265358979323846) a += 2.0 * 3.14159265358979323846;
  return a;
}

}  // namespace

void validate_spec(const TrajectorySpec& spec) {
  if (spec.waypoints.size() < 2) {
    raise(Errc::config_error, "trajectory needs at least 2 waypoints");
  }
  if (!(spec.speed_mps > 0.0)) {
    raise(Errc::config_error, "speed_mps must be positive");
  }
  if (!(spec.imu_rate_hz > 0.0) || !(spec.cam_rate_hz > 0.0) || !(spec.gnss_rate_hz > 0.0)) {
    raise(Errc::config_error, "all sensor rates must be positive");
  }
  if (spec.imu_rate_hz < spec.cam_rate_hz || spec.cam_rate_hz < spec.gnss_rate_hz) {
    raise(Errc::config_error, "rates must satisfy imu_rate >= cam_rate >= gnss_rate");
  }
  std::size_t n = spec.waypoints.size();
  std::size_t spans = spec.closed ? n : n - 1;
  for (std::size_t i = 0; i < spans; ++i) {
    const Vec3& a = spec.waypoints[i].position;
    const Vec3& b = spec.waypoints[(i + 1) % n].position;
    if ((b - a).norm() < 1e-9) {
      raise(Errc::config_error, "consecutive waypoints coincide");
    }
  }
}

Vec3 PathSampler::seg_position(const Segment& s, double u) const {
  double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * s.p0 + (u3 - 2 * u2 + u) * s.m0 +
         (-2 * u3 + 3 * u2) * s.p1 + (u3 - u2) * s.m1;
}

Vec3 PathSampler::seg_derivative(const Segment& s, double u) const {
  double u2 = u * u;
  return (6 * u2 - 6 * u) * s.p0 + (3 * u2 - 4 * u + 1) * s.m0 +
         (-6 * u2 + 6 * u) * s.p1 + (3 * u2 - 2 * u) * s.m1;
}

Vec3 PathSampler::seg_derivative2(const Segment& s, double u) const {
  return (12 * u - 6) * s.p0 + (6 * u - 4) * s.m0 + (-12 * u + 6) * s.p1 + (6 * u - 2) * s.m1;
}

double PathSampler::seg_arc_between(const Segment& s, double u0, double u1) const {
  double half = 0.5 * (u1 - u0);
  double mid = 0.5 * (u0 + u1);
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    acc += kGlWeight[i] * seg_derivative(s, mid + half * kGlNode[i]).norm();
  }
  return acc * half;
}

PathSampler::PathSampler(const TrajectorySpec& spec) : spec_(spec) {
  validate_spec(spec);
  const auto& wp = spec.waypoints;
  std::size_t n = wp.size();
  std::size_t spans = spec.closed ? n : n - 1;

  // Catmull-Rom tangents; open paths use one-sided chords at the ends so a
  // two-waypoint path degenerates to an exact straight line.
  auto tangent = [&](std::size_t i) -> Vec3 {
    if (spec.closed) {
      return 0.5 * (wp[(i + 1) % n].position - wp[(i + n - 1) % n].position);
    }
    if (i == 0) return wp[1].position - wp[0].position;
    if (i == n - 1) return wp[n - 1].position - wp[n - 2].position;
    return 0.5 * (wp[i + 1].position - wp[i - 1].position);
  };

  double s_cursor = 0.0;
  segments_.reserve(spans);
  for (std::size_t i = 0; i < spans; ++i) {
    Segment seg;
    seg.p0 = wp[i].position;
    seg.p1 = wp[(i + 1) % n].position;
    seg.m0 = tangent(i);
    seg.m1 = tangent((i + 1) % n);

    // Coarse length estimate sizes the table; then the exact cumulative
    // table is built at ~1 cm spacing.
    double coarse = 0.0;
    for (int k = 0; k < 8; ++k) {
      coarse += seg_arc_between(seg, k / 8.0, (k + 1) / 8.0);
    }
    int n_sub = std::max(2, static_cast<int>(std::ceil(coarse / kTableResolution)));
    seg.u_knots.resize(n_sub + 1);
    seg.s_knots.resize(n_sub + 1);
    seg.u_knots[0] = 0.0;
    seg.s_knots[0] = 0.0;
    for (int k = 1; k <= n_sub; ++k) {
      seg.u_knots[k] = static_cast<double>(k) / n_sub;
      seg.s_knots[k] = seg.s_knots[k - 1] + seg_arc_between(seg, seg.u_knots[k - 1], seg.u_knots[k]);
    }
    seg.s_begin = s_cursor;
    s_cursor += seg.s_knots.back();
    seg.s_end = s_cursor;
    segments_.push_back(std::move(seg));
  }
  total_length_ = s_cursor;

  // Unwrapped headings at waypoints, positioned by arc length. Closed paths
  // get one extra knot wrapping back to the first heading.
  yaw_knots_.resize(spans + 1);
  yaw_arcs_.resize(spans + 1);
  yaw_knots_[0] = wp[0].yaw;
  yaw_arcs_[0] = 0.0;
  for (std::size_t i = 1; i <= spans; ++i) {
    double target = wp[i % n].yaw;
    yaw_knots_[i] = yaw_knots_[i - 1] + wrap_angle(target - yaw_knots_[i - 1]);
    yaw_arcs_[i] = segments_[i - 1].s_end;
  }
}

void PathSampler::locate(double s, int& seg_idx, double& u) const {
  s = std::clamp(s, 0.0, total_length_);
  // Segment by global arc length.
  auto seg_it = std::upper_bound(
      segments_.begin(), segments_.end(), s,
      [](double value, const Segment& seg) { return value < seg.s_end; });
  if (seg_it == segments_.end()) --seg_it;
  seg_idx = static_cast<int>(seg_it - segments_.begin());
  const Segment& seg = *seg_it;
  double s_local = std::clamp(s - seg.s_begin, 0.0, seg.s_knots.back());

  // Bracket in the table, then Newton against local quadrature.
  auto knot_it = std::upper_bound(seg.s_knots.begin(), seg.s_knots.end(), s_local);
  std::size_t j = (knot_it == seg.s_knots.begin())
                      ? 0
                      : static_cast<std::size_t>(knot_it - seg.s_knots.begin()) - 1;
  if (j >= seg.u_knots.size() - 1) j = seg.u_knots.size() - 2;
  double u_lo = seg.u_knots[j], u_hi = seg.u_knots[j + 1];
  double s_lo = seg.s_knots[j], s_hi = seg.s_knots[j + 1];
  u = (s_hi > s_lo) ? u_lo + (u_hi - u_lo) * (s_local - s_lo) / (s_hi - s_lo) : u_lo;
  for (int it = 0; it < 4; ++it) {
    double f = s_lo + seg_arc_between(seg, u_lo, u) - s_local;
    double fp = seg_derivative(seg, u).norm();
    if (fp < 1e-12) break;
    u -= f / fp;
    u = std::clamp(u, 0.0, 1.0);
  }
}

double PathSampler::clamp_time(double t) const {
  double d = duration();
  if (t < -kTimeTolerance || t > d + kTimeTolerance) {
    raise(Errc::out_of_range, "sample time outside [0, duration]");
  }
  return std::clamp(t, 0.0, d);
}

GroundTruth PathSampler::sample(double t) const {
  t = clamp_time(t);
  double s = std::min(t * spec_.speed_mps, total_length_);
  int idx;
  double u;
  locate(s, idx, u);
  const Segment& seg = segments_[idx];

  GroundTruth out;
  out.t = t;
  out.pose.translation = seg_position(seg, u);
  Vec3 d1 = seg_derivative(seg, u);
  out.velocity = spec_.speed_mps * d1.normalized();
  out.pose.rotation = quat_from_yaw(yaw(t));
  return out;
}

Vec3 PathSampler::acceleration(double t) const {
  t = clamp_time(t);
  double s = std::min(t * spec_.speed_mps, total_length_);
  int idx;
  double u;
  locate(s, idx, u);
  const Segment& seg = segments_[idx];
  Vec3 d1 = seg_derivative(seg, u);
  Vec3 d2 = seg_derivative2(seg, u);
  double n2 = d1.squaredNorm();
  Vec3 tang = d1 / std::sqrt(n2);
  // Constant speed along the path leaves only the centripetal component.
  Vec3 normal_part = d2 - tang * tang.dot(d2);
  return spec_.speed_mps * spec_.speed_mps * normal_part / n2;
}

double PathSampler::yaw(double t) const {
  t = clamp_time(t);
  double s = std::min(t * spec_.speed_mps, total_length_);
  auto it = std::upper_bound(yaw_arcs_.begin(), yaw_arcs_.end(), s);
  std::size_t j = (it == yaw_arcs_.begin()) ? 0 : static_cast<std::size_t>(it - yaw_arcs_.begin()) - 1;
  if (j >= yaw_arcs_.size() - 1) j = yaw_arcs_.size() - 2;
  double span = yaw_arcs_[j + 1] - yaw_arcs_[j];
  double w = (span > 0.0) ? (s - yaw_arcs_[j]) / span : 0.0;
  return yaw_knots_[j] + w * (yaw_knots_[j + 1] - yaw_knots_[j]);
}

double PathSampler::yaw_rate(double t) const {
  t = clamp_time(t);
  double s = std::min(t * spec_.speed_mps, total_length_);
  auto it = std::upper_bound(yaw_arcs_.begin(), yaw_arcs_.end(), s);
  std::size_t j = (it == yaw_arcs_.begin()) ? 0 : static_cast<std::size_t>(it - yaw_arcs_.begin()) - 1;
  if (j >= yaw_arcs_.size() - 1) j = yaw_arcs_.size() - 2;
  double span = yaw_arcs_[j + 1] - yaw_arcs_[j];
  if (span <= 0.0) return 0.0;
  return (yaw_knots_[j + 1] - yaw_knots_[j]) / span * spec_.speed_mps;
}

GroundTruth sample_trajectory(const TrajectorySpec& spec, double t) {
  return PathSampler(spec).sample(t);
}

}  // namespace mms
