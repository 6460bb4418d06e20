#include "mms/vo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mms/errors.hpp"
#include "mms/logging.hpp"
#include "mms/random.hpp"

namespace mms {
namespace {

// Sampling stream for RANSAC; keyed additionally by the frame timestamp so
// every frame pair draws an independent, reproducible sequence.
constexpr std::uint64_t kStreamRansac = 17;

std::vector<const DepthObservation*> sorted_view(const DepthFrame& frame) {
  std::vector<const DepthObservation*> v;
  v.reserve(frame.observations.size());
  for (const auto& obs : frame.observations) v.push_back(&obs);
  std::sort(v.begin(), v.end(), [](const DepthObservation* a, const DepthObservation* b) {
    return a->landmark_id < b->landmark_id;
  });
  return v;
}

}  // namespace

std::vector<Correspondence> match_frames(const DepthFrame& prev, const DepthFrame& curr) {
  const auto a = sorted_view(prev);
  const auto b = sorted_view(curr);
  std::vector<Correspondence> out;
  out.reserve(std::min(a.size(), b.size()));
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i]->landmark_id < b[j]->landmark_id) {
      ++i;
    } else if (b[j]->landmark_id < a[i]->landmark_id) {
      ++j;
    } else {
      out.push_back({a[i]->landmark_id, a[i]->point, b[j]->point});
      ++i;
      ++j;
    }
  }
  return out;
}

RigidFit rigid_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size()) {
    raise(Errc::degenerate_geometry, "rigid_align: size mismatch");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    raise(Errc::degenerate_geometry, "rigid_align: need at least 3 point pairs, got " +
                                         std::to_string(n));
  }
  Vec3 src_mean = Vec3::Zero();
  Vec3 dst_mean = Vec3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    src_mean += src[k];
    dst_mean += dst[k];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  Mat3 cross = Mat3::Zero();
  double scatter = 0.0;  // spread of the source set, for the rank tolerance
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 ds = src[k] - src_mean;
    const Vec3 dd = dst[k] - dst_mean;
    cross += dd * ds.transpose();
    scatter += ds.squaredNorm();
  }
  cross /= static_cast<double>(n);
  scatter /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // Rotation needs rank >= 2: collinear or coincident sets leave one axis
  // unconstrained. Scale-aware tolerance so metric input behaves the same
  // at any point density.
  const double tol = 1e-9 * std::max(1.0, std::max(sv(0), scatter));
  if (sv(1) <= tol) {
    raise(Errc::degenerate_geometry, "rigid_align: rank-deficient point configuration");
  }
  Mat3 flip = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    flip(2, 2) = -1.0;
  }
  const Mat3 rot = svd.matrixU() * flip * svd.matrixV().transpose();

  RigidFit fit;
  fit.transform.rotation = quat_from_matrix(rot);
  fit.transform.translation = dst_mean - rot * src_mean;
  double sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sq += (dst[k] - pose_apply(fit.transform, src[k])).squaredNorm();
  }
  fit.rmse = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

RigidFit estimate_rigid(const std::vector<Correspondence>& correspondences) {
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  src.reserve(correspondences.size());
  dst.reserve(correspondences.size());
  for (const auto& c : correspondences) {
    src.push_back(c.point_prev);
    dst.push_back(c.point_curr);
  }
  return rigid_align(src, dst);
}

Mat6 rigid_fit_covariance(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                          const Pose3& transform, double diag_floor,
                          const std::vector<double>& point_sigmas) {
  const std::size_t n = src.size();
  const bool known_noise = !point_sigmas.empty();
  if (known_noise && point_sigmas.size() != n) {
    raise(Errc::degenerate_geometry, "rigid_fit_covariance: sigma count mismatch");
  }
  Mat6 jtwj = Mat6::Zero();
  double sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 mapped = pose_apply(transform, src[k]);
    sq += (dst[k] - mapped).squaredNorm();
    // Residual r_k = dst_k - (T + d) * src_k under a left perturbation
    // d = [rho, theta]: dr/drho = -I, dr/dtheta = [mapped]x.
    Eigen::Matrix<double, 3, 6> jac;
    jac.block<3, 3>(0, 0) = -Mat3::Identity();
    jac.block<3, 3>(0, 3) = skew(mapped);
    const double w =
        known_noise ? 1.0 / std::max(point_sigmas[k] * point_sigmas[k], 1e-12) : 1.0;
    jtwj += w * (jac.transpose() * jac);
  }
  Mat6 cov;
  if (known_noise) {
    // Per-point noise levels are given, so the parameter covariance follows
    // directly from the weighted normal equations; no variance pooling.
    cov = jtwj.ldlt().solve(Mat6::Identity());
  } else {
    // Unknown noise level: pool a single residual variance across points.
    // Only honest when the points share one noise scale; with strongly
    // range-dependent noise, pass point_sigmas instead - pooling lets the
    // overfit of a small point set masquerade as precision.
    const double dof = 3.0 * static_cast<double>(n) - 6.0;
    const double s2 = dof > 0.0 ? sq / dof : 0.0;
    cov = s2 * jtwj.ldlt().solve(Mat6::Identity());
  }
  cov = 0.5 * (cov + cov.transpose()).eval();
  for (int i = 0; i < 6; ++i) {
    cov(i, i) = std::max(cov(i, i), diag_floor);
  }
  return cov;
}

OdomDelta vo_step(const DepthFrame& prev, const DepthFrame& curr, const VoParams& params) {
  if (!(curr.t > prev.t)) {
    raise(Errc::non_monotonic_time,
          "vo_step: frame times must increase (prev " + std::to_string(prev.t) + ", curr " +
              std::to_string(curr.t) + ")");
  }
  OdomDelta out;
  out.t_prev = prev.t;
  out.t_curr = curr.t;
  out.covariance = Mat6::Identity() * params.invalid_cov_diag;

  const std::vector<Correspondence> corrs = match_frames(prev, curr);
  const std::size_t n = corrs.size();
  if (n < 3 || static_cast<int>(n) < params.min_inliers) {
    MMS_DEBUG("vo_step t=" << curr.t << ": only " << n << " correspondences, frame dropped");
    return out;
  }

  // Per-pair inlier threshold: 3 sigma of the pair's combined depth noise
  // (noise grows linearly with range on both endpoints).
  std::vector<double> threshold(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double zp = corrs[k].point_prev.z();
    const double zc = corrs[k].point_curr.z();
    const double sigma = params.depth_sigma_per_meter * std::sqrt(zp * zp + zc * zc);
    threshold[k] = std::max(3.0 * sigma, 1e-6);
  }

  GaussianSampler rng(derive_seed(params.seed ^ kStreamRansac,
                                  static_cast<std::uint64_t>(std::llround(curr.t * 1e6))));
  std::vector<std::size_t> best_inliers;
  std::vector<Vec3> sample_src(3);
  std::vector<Vec3> sample_dst(3);
  for (int it = 0; it < params.ransac_iterations; ++it) {
    std::size_t idx[3];
    idx[0] = rng.uniform_index(n);
    do {
      idx[1] = rng.uniform_index(n);
    } while (idx[1] == idx[0]);
    do {
      idx[2] = rng.uniform_index(n);
    } while (idx[2] == idx[0] || idx[2] == idx[1]);
    for (int m = 0; m < 3; ++m) {
      sample_src[m] = corrs[idx[m]].point_prev;
      sample_dst[m] = corrs[idx[m]].point_curr;
    }
    Pose3 model;
    try {
      model = rigid_align(sample_src, sample_dst).transform;
    } catch (const Error&) {
      continue;  // collinear minimal sample; draw again
    }
    std::vector<std::size_t> inliers;
    inliers.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double err = (corrs[k].point_curr - pose_apply(model, corrs[k].point_prev)).norm();
      if (err <= threshold[k]) inliers.push_back(k);
    }
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
    }
  }

  if (static_cast<int>(best_inliers.size()) < params.min_inliers) {
    MMS_DEBUG("vo_step t=" << curr.t << ": " << best_inliers.size()
                           << " consensus inliers, frame dropped");
    return out;
  }

  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  std::vector<double> sigmas;
  src.reserve(best_inliers.size());
  dst.reserve(best_inliers.size());
  sigmas.reserve(best_inliers.size());
  for (std::size_t k : best_inliers) {
    src.push_back(corrs[k].point_prev);
    dst.push_back(corrs[k].point_curr);
    sigmas.push_back(std::max(threshold[k] / 3.0, 1e-6));
  }
  Pose3 cam_motion;  // maps previous-frame camera coords to current-frame
  try {
    cam_motion = rigid_align(src, dst).transform;
  } catch (const Error&) {
    MMS_DEBUG("vo_step t=" << curr.t << ": degenerate consensus set, frame dropped");
    return out;
  }

  // The unweighted fit treats every point as equally trustworthy, but the
  // depth noise grows with range, so a handful of far points can drag the
  // estimate. Refine with the known per-point noise as weights: a few
  // Gauss-Newton steps on the same left-perturbation parameterization the
  // covariance uses.
  for (int it = 0; it < 3; ++it) {
    Mat6 jtwj = Mat6::Zero();
    Vec6 jtwr = Vec6::Zero();
    for (std::size_t k = 0; k < src.size(); ++k) {
      const Vec3 mapped = pose_apply(cam_motion, src[k]);
      const Vec3 r = dst[k] - mapped;
      Eigen::Matrix<double, 3, 6> jac;
      jac.block<3, 3>(0, 0) = -Mat3::Identity();
      jac.block<3, 3>(0, 3) = skew(mapped);
      const double w = 1.0 / (sigmas[k] * sigmas[k]);
      jtwj += w * (jac.transpose() * jac);
      jtwr += w * (jac.transpose() * r);
    }
    const Vec6 step = jtwj.ldlt().solve(-jtwr);
    Pose3 upd;
    upd.rotation = quat_exp(step.tail<3>());
    upd.translation = step.head<3>();
    cam_motion = pose_compose(upd, cam_motion);
    if (step.norm() < 1e-12) break;
  }
  const Mat6 cam_cov =
      rigid_fit_covariance(src, dst, cam_motion, params.cov_diag_floor, sigmas);

  // Camera-frame motion E maps previous camera coords to current ones, so
  // the pose of the current body frame in the previous one is
  // body_from_camera * E^-1 * camera_from_body.
  Pose3 mount;
  mount.rotation = params.body_from_camera;
  mount.translation = Vec3::Zero();
  out.delta = pose_compose(mount, pose_compose(pose_inverse(cam_motion), pose_inverse(mount)));
  const Mat6 ad = se3_adjoint(mount);
  // The tangent perturbation conjugates the same way as the pose itself;
  // inversion flips the perturbation's sign, which the quadratic form absorbs.
  out.covariance = ad * cam_cov * ad.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  for (int i = 0; i < 6; ++i) {
    out.covariance(i, i) = std::max(out.covariance(i, i), params.cov_diag_floor);
  }
  out.inlier_count = static_cast<int>(best_inliers.size());
  out.valid = true;
  return out;
}

}  // namespace mms
