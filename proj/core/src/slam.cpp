#include "mms/slam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mms/errors.hpp"
#include "mms/logging.hpp"
#include "mms/vo.hpp"

namespace mms {
namespace {

constexpr int kMaxIterations = 100;
constexpr double kRelTolerance = 1e-9;
constexpr double kLambdaStart = 1e-6;
constexpr double kLambdaMax = 1e8;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

Vec6 edge_residual(const GraphEdge& e, const Pose3& from, const Pose3& to) {
  return tangent_to_vec(
      se3_log(pose_compose(pose_inverse(e.relative), pose_compose(pose_inverse(from), to))));
}

double graph_chi2(const PoseGraph& g) {
  double chi2 = 0.0;
  for (const auto& e : g.edges) {
    const Vec6 r =
        edge_residual(e, g.keyframes[e.from_id].pose, g.keyframes[e.to_id].pose);
    chi2 += r.dot(e.information * r);
  }
  return chi2;
}

}  // namespace

std::optional<KeyFrame> maybe_insert_keyframe(const KeyFrame* last, const Pose3& pose,
                                              const DepthFrame& frame,
                                              const KeyframeThresholds& thresholds) {
  if (last != nullptr) {
    const double dist = (pose.translation - last->pose.translation).norm();
    const double angle = quat_angle_between(last->pose.rotation, pose.rotation);
    if (dist < thresholds.min_translation_m && angle < thresholds.min_rotation_rad) {
      return std::nullopt;
    }
  }
  KeyFrame kf;
  kf.id = last ? last->id + 1 : 0;
  kf.t = frame.t;
  kf.pose = pose;

  std::vector<const DepthObservation*> obs;
  obs.reserve(frame.observations.size());
  for (const auto& o : frame.observations) obs.push_back(&o);
  std::sort(obs.begin(), obs.end(), [](const DepthObservation* a, const DepthObservation* b) {
    return a->landmark_id < b->landmark_id;
  });
  kf.cloud.points.reserve(obs.size());
  kf.landmark_ids.reserve(obs.size());
  for (const auto* o : obs) {
    kf.cloud.points.push_back(rotate(thresholds.body_from_camera, o->point));
    kf.landmark_ids.push_back(o->landmark_id);
  }
  return kf;
}

std::vector<GraphEdge> detect_loops(const PoseGraph& graph, const KeyFrame& new_kf,
                                    const LoopParams& params) {
  std::vector<GraphEdge> out;
  for (const auto& kf : graph.keyframes) {
    if (std::abs(new_kf.id - kf.id) <= params.min_id_gap) continue;
    if ((new_kf.pose.translation - kf.pose.translation).norm() >= params.max_distance_m) {
      continue;
    }
    // Landmark-id overlap stands in for appearance similarity: revisiting a
    // place means seeing mostly the same landmarks. Both id lists are
    // sorted, so intersection is a linear scan.
    std::vector<std::size_t> ia, ib;
    std::size_t i = 0, j = 0;
    while (i < kf.landmark_ids.size() && j < new_kf.landmark_ids.size()) {
      if (kf.landmark_ids[i] < new_kf.landmark_ids[j]) {
        ++i;
      } else if (new_kf.landmark_ids[j] < kf.landmark_ids[i]) {
        ++j;
      } else {
        ia.push_back(i);
        ib.push_back(j);
        ++i;
        ++j;
      }
    }
    const std::size_t shared = ia.size();
    const std::size_t unioned =
        kf.landmark_ids.size() + new_kf.landmark_ids.size() - shared;
    if (unioned == 0 ||
        static_cast<double>(shared) / static_cast<double>(unioned) < params.min_jaccard) {
      continue;
    }
    // Relative pose of the new keyframe in the old one's body frame: a
    // shared landmark with old-frame coordinates a and new-frame
    // coordinates b satisfies a = Z * b.
    std::vector<Vec3> src, dst;
    src.reserve(shared);
    dst.reserve(shared);
    for (std::size_t k = 0; k < shared; ++k) {
      src.push_back(new_kf.cloud.points[ib[k]]);
      dst.push_back(kf.cloud.points[ia[k]]);
    }
    GraphEdge edge;
    try {
      edge.relative = rigid_align(src, dst).transform;
    } catch (const Error&) {
      MMS_DEBUG("detect_loops: degenerate shared set between kf " << kf.id << " and "
                                                                  << new_kf.id);
      continue;
    }
    const Mat6 cov_left =
        rigid_fit_covariance(src, dst, edge.relative, params.cov_diag_floor);
    // The fit covariance lives on a left perturbation of Z; the optimizer
    // models measurement noise on the right. Conjugate accordingly.
    const Mat6 ad_inv = se3_adjoint(pose_inverse(edge.relative));
    Mat6 cov_right = ad_inv * cov_left * ad_inv.transpose();
    cov_right = 0.5 * (cov_right + cov_right.transpose()).eval();
    Mat6 info = cov_right.ldlt().solve(Mat6::Identity());
    info = 0.5 * (info + info.transpose()).eval();
    edge.from_id = kf.id;
    edge.to_id = new_kf.id;
    edge.kind = EdgeKind::loop;
    edge.information = info;
    out.push_back(edge);
  }
  return out;
}

OptimizeResult optimize(PoseGraph& graph) {
  OptimizeResult res;
  const int n = static_cast<int>(graph.keyframes.size());
  if (n == 0) return res;

  UnionFind uf(n);
  for (const auto& e : graph.edges) uf.join(e.from_id, e.to_id);
  for (int i = 0; i < n; ++i) {
    if (uf.find(i) != uf.find(0)) {
      raise(Errc::disconnected_graph,
            "optimize: keyframe " + std::to_string(i) + " unreachable from keyframe 0");
    }
  }

  res.chi2_initial = graph_chi2(graph);
  res.chi2_final = res.chi2_initial;
  if (n == 1 || graph.edges.empty()) return res;

  const int dim = 6 * (n - 1);  // keyframe 0 is the gauge and stays put
  double chi2 = res.chi2_initial;
  double lambda = 0.0;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    if (chi2 == 0.0) break;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (const auto& e : graph.edges) {
      const Pose3& ti = graph.keyframes[e.from_id].pose;
      const Pose3& tj = graph.keyframes[e.to_id].pose;
      const Vec6 r = edge_residual(e, ti, tj);
      const Mat6 jr_inv = se3_right_jacobian_inv(vec_to_tangent(r));
      const Mat6 jj = jr_inv;
      const Mat6 ji = -jr_inv * se3_adjoint(pose_compose(pose_inverse(tj), ti));
      const int bi = (e.from_id - 1) * 6;
      const int bj = (e.to_id - 1) * 6;
      const Vec6 wr = e.information * r;
      if (e.from_id != 0) {
        H.block<6, 6>(bi, bi) += ji.transpose() * e.information * ji;
        b.segment<6>(bi) += ji.transpose() * wr;
      }
      if (e.to_id != 0) {
        H.block<6, 6>(bj, bj) += jj.transpose() * e.information * jj;
        b.segment<6>(bj) += jj.transpose() * wr;
      }
      if (e.from_id != 0 && e.to_id != 0) {
        H.block<6, 6>(bi, bj) += ji.transpose() * e.information * jj;
        H.block<6, 6>(bj, bi) += jj.transpose() * e.information * ji;
      }
    }

    // Try the plain Gauss-Newton step first; escalate damping only when a
    // step would increase chi2.
    bool accepted = false;
    while (true) {
      Eigen::MatrixXd Hd = H;
      if (lambda > 0.0) Hd.diagonal().array() += lambda;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
      const Eigen::VectorXd delta = ldlt.solve(-b);
      const bool solvable = ldlt.info() == Eigen::Success && delta.allFinite() &&
                            (Hd * delta + b).norm() <= 1e-6 * std::max(1.0, b.norm());
      if (!solvable) {
        if (lambda < kLambdaMax) {
          lambda = lambda == 0.0 ? kLambdaStart : lambda * 10.0;
          continue;
        }
        raise(Errc::singular_hessian, "optimize: normal equations are singular");
      }

      std::vector<Pose3> backup(n);
      for (int i = 1; i < n; ++i) backup[i] = graph.keyframes[i].pose;
      for (int i = 1; i < n; ++i) {
        const Vec6 d = delta.segment<6>((i - 1) * 6);
        graph.keyframes[i].pose =
            pose_compose(graph.keyframes[i].pose, se3_exp(vec_to_tangent(d)));
      }
      const double chi2_new = graph_chi2(graph);
      if (chi2_new <= chi2) {
        res.iterations = iter + 1;
        const double improvement = (chi2 - chi2_new) / std::max(chi2, 1e-300);
        chi2 = chi2_new;
        accepted = true;
        lambda = 0.0;
        if (improvement < kRelTolerance) iter = kMaxIterations;  // converged
        break;
      }
      for (int i = 1; i < n; ++i) graph.keyframes[i].pose = backup[i];
      if (lambda >= kLambdaMax) break;  // no improving step found
      lambda = lambda == 0.0 ? kLambdaStart : lambda * 10.0;
    }
    if (!accepted) break;
  }
  res.chi2_final = chi2;
  return res;
}

PointCloud assemble_map(const PoseGraph& graph, double voxel_size_m) {
  if (!(voxel_size_m > 0.0)) {
    raise(Errc::config_error, "assemble_map: voxel size must be positive");
  }
  struct Cell {
    Vec3 sum = Vec3::Zero();
    std::int64_t count = 0;
  };
  struct KeyHash {
    std::size_t operator()(const std::tuple<std::int64_t, std::int64_t, std::int64_t>& k) const {
      std::uint64_t h = 1469598103934665603ull;
      const auto mix = [&h](std::int64_t v) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ull;
      };
      mix(std::get<0>(k));
      mix(std::get<1>(k));
      mix(std::get<2>(k));
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, Cell, KeyHash> cells;
  for (const auto& kf : graph.keyframes) {
    for (const auto& p : kf.cloud.points) {
      const Vec3 w = pose_apply(kf.pose, p);
      const auto key = std::make_tuple(static_cast<std::int64_t>(std::floor(w.x() / voxel_size_m)),
                                       static_cast<std::int64_t>(std::floor(w.y() / voxel_size_m)),
                                       static_cast<std::int64_t>(std::floor(w.z() / voxel_size_m)));
      auto& c = cells[key];
      c.sum += w;
      c.count += 1;
    }
  }
  std::vector<std::pair<std::tuple<std::int64_t, std::int64_t, std::int64_t>, Cell>> sorted(
      cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  PointCloud out;
  out.points.reserve(sorted.size());
  for (const auto& [key, cell] : sorted) {
    out.points.push_back(cell.sum / static_cast<double>(cell.count));
  }
  return out;
}

SlamResult run_slam(const std::vector<NavState>& states, const std::vector<DepthFrame>& frames,
                    const SlamParams& params) {
  SlamResult res;
  if (states.empty()) {
    raise(Errc::empty_log, "run_slam: empty trajectory");
  }

  Mat6 odom_info = Mat6::Zero();
  const double wt = 1.0 / (params.odom_trans_sigma_m * params.odom_trans_sigma_m);
  const double wr = 1.0 / (params.odom_rot_sigma_rad * params.odom_rot_sigma_rad);
  odom_info.diagonal() << wt, wt, wt, wr, wr, wr;

  std::size_t si = 0;
  for (const auto& frame : frames) {
    while (si + 1 < states.size() && states[si].t < frame.t) ++si;
    if (std::abs(states[si].t - frame.t) > 1e-9) {
      MMS_WARN("run_slam: no trajectory state at frame time " << frame.t << ", frame skipped");
      continue;
    }
    Pose3 pose;
    pose.rotation = states[si].orientation;
    pose.translation = states[si].position;

    const KeyFrame* last =
        res.graph.keyframes.empty() ? nullptr : &res.graph.keyframes.back();
    auto kf = maybe_insert_keyframe(last, pose, frame, params.keyframe);
    if (!kf) continue;

    if (last != nullptr) {
      GraphEdge e;
      e.from_id = last->id;
      e.to_id = kf->id;
      e.relative = pose_compose(pose_inverse(last->pose), kf->pose);
      e.information = odom_info;
      e.kind = EdgeKind::odometry;
      res.graph.edges.push_back(e);
    }
    res.graph.keyframes.push_back(std::move(*kf));

    auto loops = detect_loops(res.graph, res.graph.keyframes.back(), params.loop);
    res.n_loop_edges += static_cast<int>(loops.size());
    for (auto& e : loops) res.graph.edges.push_back(std::move(e));
  }

  res.initial_poses.reserve(res.graph.keyframes.size());
  for (const auto& kf : res.graph.keyframes) res.initial_poses.push_back(kf.pose);

  const OptimizeResult opt = optimize(res.graph);
  res.chi2_initial = opt.chi2_initial;
  res.chi2_final = opt.chi2_final;
  res.iterations = opt.iterations;
  res.map = assemble_map(res.graph, params.voxel_size_m);
  MMS_INFO("run_slam: " << res.graph.keyframes.size() << " keyframes, " << res.n_loop_edges
                        << " loop edges, chi2 " << res.chi2_initial << " -> " << res.chi2_final
                        << " in " << res.iterations << " iterations, map "
                        << res.map.points.size() << " points");
  return res;
}

}  // namespace mms
