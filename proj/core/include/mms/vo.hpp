#pragma once

#include <cstdint>
#include <vector>

#include "mms/geometry.hpp"
#include "mms/records.hpp"
#include "mms/simulation.hpp"

namespace mms {

/// One landmark seen in two consecutive depth frames (camera coordinates).
struct Correspondence {
  std::int64_t landmark_id = 0;
  Vec3 point_prev = Vec3::Zero();
  Vec3 point_curr = Vec3::Zero();
};

/// Relative body motion between two camera frames.
///   delta: pose of the current body frame expressed in the previous body
///          frame, i.e. x_prev = delta * x_curr for a point fixed in the
///          current body frame.
///   covariance: 6x6 over the local tangent [rho, theta] of delta.
struct OdomDelta {
  double t_prev = 0.0;
  double t_curr = 0.0;
  Pose3 delta = pose_identity();
  Mat6 covariance = Mat6::Identity();
  int inlier_count = 0;
  bool valid = false;
};

struct VoParams {
  double depth_sigma_per_meter = 0.01;  // must match the depth sensor model
  int ransac_iterations = 50;
  int min_inliers = 6;
  std::uint64_t seed = 0;          // per-call draw streams derive from this
  Quat body_from_camera = CameraModel::default_mount();
  double cov_diag_floor = 1e-6;    // keeps reported covariance invertible
  double invalid_cov_diag = 1e2;   // covariance stamped on invalid deltas
};

/// Intersects two frames by landmark id (both frames carry ids sorted
/// ascending; unsorted input is handled by sorting a copy).
std::vector<Correspondence> match_frames(const DepthFrame& prev, const DepthFrame& curr);

struct RigidFit {
  Pose3 transform = pose_identity();  // minimizes sum |dst_i - T * src_i|^2
  double rmse = 0.0;
};

/// Least-squares rigid alignment (SVD of the cross-covariance with
/// reflection correction). Throws DegenerateGeometry for fewer than 3
/// points or a rank-deficient configuration (collinear/coincident).
RigidFit rigid_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

/// rigid_align with src = point_prev, dst = point_curr: the returned
/// transform maps previous-frame camera coordinates to current-frame ones.
RigidFit estimate_rigid(const std::vector<Correspondence>& correspondences);

/// Full frame-to-frame step: match, RANSAC with a depth-scaled inlier
/// threshold, refit on the consensus set weighted by each pair's known
/// range-dependent noise, covariance from the weighted normal equations,
/// and conversion from camera to body coordinates.
/// Returns valid=false (identity delta, inflated covariance) when fewer
/// than min_inliers survive. Throws NonMonotonicTime if curr.t <= prev.t.
OdomDelta vo_step(const DepthFrame& prev, const DepthFrame& curr, const VoParams& params);

/// First-order covariance of a rigid fit on the stacked per-point Jacobian
/// J_k = [-I, [T*src_k]x] (left perturbation of the camera-frame
/// transform). With point_sigmas given (one isotropic sigma per pair) the
/// covariance is (J' W J)^-1 from the known noise levels; without them a
/// single residual variance on 3n-6 dof is pooled across points, which is
/// only honest when the points share one noise scale.
/// Exposed for reuse by loop-closure edge construction.
Mat6 rigid_fit_covariance(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                          const Pose3& transform, double diag_floor,
                          const std::vector<double>& point_sigmas = {});

}  // namespace mms
