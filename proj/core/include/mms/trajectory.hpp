#pragma once

#include <vector>

#include "mms/records.hpp"

namespace mms {

struct Waypoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;  // radians, heading about world z
};

struct TrajectorySpec {
  std::vector<Waypoint> waypoints;
  double speed_mps = 1.0;
  double imu_rate_hz = 300.0;
  double cam_rate_hz = 30.0;
  double gnss_rate_hz = 5.0;
  bool closed = false;  // true: last waypoint connects back to the first
};

/// Throws ConfigError unless: >= 2 waypoints, speed > 0, all rates > 0,
/// imu_rate >= cam_rate >= gnss_rate.
void validate_spec(const TrajectorySpec& spec);

/// Constant-speed sampler along a Catmull-Rom spline through the waypoints.
///
/// The spline is reparameterized by arc length (piecewise lookup table at
/// 1 cm resolution, refined by Newton iterations against Gauss-Legendre
/// quadrature), so |velocity| == speed_mps everywhere. Yaw is interpolated
/// linearly in arc length between waypoint headings along the shortest
/// angular path; orientation is yaw-only (roll = pitch = 0).
class PathSampler {
 public:
  explicit PathSampler(const TrajectorySpec& spec);

  double length() const { return total_length_; }
  double duration() const { return total_length_ / spec_.speed_mps; }

  /// Pose and world velocity at t in [0, duration]; throws OutOfRange
  /// beyond a small numerical tolerance past the ends.
  GroundTruth sample(double t) const;

  /// Analytic world-frame acceleration (purely centripetal: speed is
  /// constant along the path).
  Vec3 acceleration(double t) const;

  double yaw(double t) const;
  double yaw_rate(double t) const;

 private:
  struct Segment {
    Vec3 p0, m0, p1, m1;          // Hermite form of one Catmull-Rom span
    std::vector<double> u_knots;  // parameter values of the arc-length table
    std::vector<double> s_knots;  // cumulative arc length at u_knots
    double s_begin = 0.0;         // global arc length at segment start
    double s_end = 0.0;
  };

  Vec3 seg_position(const Segment& s, double u) const;
  Vec3 seg_derivative(const Segment& s, double u) const;   // dC/du
  Vec3 seg_derivative2(const Segment& s, double u) const;  // d2C/du2
  double seg_arc_between(const Segment& s, double u0, double u1) const;

  /// Maps global arc length to (segment index, local parameter u).
  void locate(double s, int& seg_idx, double& u) const;
  double clamp_time(double t) const;

  TrajectorySpec spec_;
  std::vector<Segment> segments_;
  std::vector<double> yaw_knots_;    // unwrapped waypoint headings
  std::vector<double> yaw_arcs_;     // arc length of each waypoint
  double total_length_ = 0.0;
};

/// One-shot convenience wrapper; builds a sampler per call. Generators that
/// sample densely should construct a PathSampler once instead.
GroundTruth sample_trajectory(const TrajectorySpec& spec, double t);

}  // namespace mms
