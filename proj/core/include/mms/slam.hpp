#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mms/geometry.hpp"
#include "mms/records.hpp"
#include "mms/simulation.hpp"

namespace mms {

struct PointCloud {
  std::vector<Vec3> points;  // m; finite coordinates
};

/// Graph node: a selected pose with its body-frame point cloud. Points and
/// landmark_ids are parallel arrays sorted by landmark id, which makes
/// overlap tests and shared-point extraction order-independent.
struct KeyFrame {
  int id = 0;  // dense 0..N-1 in insertion order
  double t = 0.0;
  Pose3 pose = pose_identity();  // map frame; mutable by the optimizer
  PointCloud cloud;              // body-frame coordinates
  std::vector<std::int64_t> landmark_ids;
};

enum class EdgeKind { odometry, loop };

struct GraphEdge {
  int from_id = 0;
  int to_id = 0;
  Pose3 relative = pose_identity();   // pose of to-frame expressed in from-frame
  Mat6 information = Mat6::Identity();  // symmetric PSD
  EdgeKind kind = EdgeKind::odometry;
};

struct PoseGraph {
  std::vector<KeyFrame> keyframes;
  std::vector<GraphEdge> edges;
};

struct KeyframeThresholds {
  double min_translation_m = 0.5;
  double min_rotation_rad = 15.0 * M_PI / 180.0;
  Quat body_from_camera = CameraModel::default_mount();
};

/// Inserts a keyframe when there is no previous one or the pose moved far
/// enough (translation or rotation) since the last insertion. The frame's
/// camera-space points are rotated into the body frame and sorted by
/// landmark id. Returns nullopt when below both thresholds.
std::optional<KeyFrame> maybe_insert_keyframe(const KeyFrame* last, const Pose3& pose,
                                              const DepthFrame& frame,
                                              const KeyframeThresholds& thresholds);

struct LoopParams {
  int min_id_gap = 10;         // candidates need |id difference| > this
  double max_distance_m = 3.0; // between current pose estimates
  double min_jaccard = 0.3;    // landmark-id overlap |A∩B| / |A∪B|
  double cov_diag_floor = 1e-6;
};

/// Loop-closure candidates for a freshly inserted keyframe: every
/// non-adjacent keyframe close in space with enough landmark overlap. The
/// edge pose comes from a rigid fit of the shared landmark points; the
/// information matrix is the inverse of that fit's covariance. Candidates
/// whose shared points are too few or degenerate are skipped.
std::vector<GraphEdge> detect_loops(const PoseGraph& graph, const KeyFrame& new_kf,
                                    const LoopParams& params);

struct OptimizeResult {
  double chi2_initial = 0.0;
  double chi2_final = 0.0;
  int iterations = 0;
};

/// Gauss-Newton on the pose graph, keyframe 0 held fixed as the gauge.
/// Edge residual: log(inverse(relative) * inverse(pose_from) * pose_to),
/// weighted by the edge information. A rejected step (chi2 would grow)
/// retries with Levenberg damping escalated from 1e-6 by factors of 10.
/// Stops when the relative chi2 improvement drops below 1e-9 or after 100
/// accepted iterations. Throws DisconnectedGraph and SingularHessian.
OptimizeResult optimize(PoseGraph& graph);

/// Union of all keyframe clouds in map frame, voxel-downsampled to one
/// centroid per occupied cell. Output order is deterministic (sorted by
/// cell index).
PointCloud assemble_map(const PoseGraph& graph, double voxel_size_m = 0.1);

struct SlamParams {
  KeyframeThresholds keyframe;
  LoopParams loop;
  double voxel_size_m = 0.1;
  // Weight of consecutive-keyframe odometry edges, expressed as per-axis
  // sigmas of the fused relative motion.
  double odom_trans_sigma_m = 0.05;
  double odom_rot_sigma_rad = 0.5 * M_PI / 180.0;
};

struct SlamResult {
  PoseGraph graph;                  // optimized poses
  std::vector<Pose3> initial_poses; // keyframe poses before optimization
  PointCloud map;
  double chi2_initial = 0.0;
  double chi2_final = 0.0;
  int iterations = 0;
  int n_loop_edges = 0;
};

/// Full back-end pass over a fused trajectory and its depth frames:
/// keyframe selection, odometry edges from consecutive fused poses, loop
/// detection, optimization, and map assembly. Frame timestamps must match
/// trajectory timestamps exactly (the replay emits a state per IMU record,
/// and camera times land on that grid).
SlamResult run_slam(const std::vector<NavState>& states, const std::vector<DepthFrame>& frames,
                    const SlamParams& params);

}  // namespace mms
