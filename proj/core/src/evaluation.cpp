#include "mms/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <tuple>

#include <Eigen/Cholesky>

#include "mms/errors.hpp"
#include "mms/svg.hpp"
#include "mms/vo.hpp"

namespace mms {
namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Pose3 state_pose(const NavState& s) {
  Pose3 p;
  p.rotation = s.orientation;
  p.translation = s.position;
  return p;
}

Pose3 interpolate_pose(const NavState& a, const NavState& b, double u) {
  Pose3 p;
  p.translation = (1.0 - u) * a.position + u * b.position;
  p.rotation = quat_slerp(a.orientation, b.orientation, u);
  return p;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> associate(const std::vector<NavState>& est,
                                                           const std::vector<NavState>& ref,
                                                           double max_dt) {
  // Candidate pairs within the window, cheapest |dt| first; the window scan
  // is linear because both trajectories are time-sorted.
  struct Cand {
    double adt;
    std::size_t ei;
    std::size_t ri;
  };
  std::vector<Cand> cands;
  std::size_t lo = 0;
  for (std::size_t ri = 0; ri < ref.size(); ++ri) {
    const double t = ref[ri].t;
    while (lo < est.size() && est[lo].t < t - max_dt) ++lo;
    for (std::size_t ei = lo; ei < est.size() && est[ei].t <= t + max_dt; ++ei) {
      cands.push_back({std::abs(est[ei].t - t), ei, ri});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(a.adt, a.ei, a.ri) < std::tie(b.adt, b.ei, b.ri);
  });
  std::vector<char> est_used(est.size(), 0);
  std::vector<char> ref_used(ref.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : cands) {
    if (est_used[c.ei] || ref_used[c.ri]) continue;
    est_used[c.ei] = 1;
    ref_used[c.ri] = 1;
    pairs.emplace_back(c.ei, c.ri);
  }
  if (pairs.empty()) {
    raise(Errc::no_overlap, "associate: no timestamps within " + shortest(max_dt) + " s");
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Pose3 align_se3(const std::vector<Vec3>& est_positions, const std::vector<Vec3>& ref_positions) {
  return rigid_align(est_positions, ref_positions).transform;
}

MetricReport compute_metrics(const std::vector<NavState>& est, const std::vector<NavState>& ref,
                             const std::vector<Mat3>* est_position_covs,
                             const MetricOptions& options) {
  const auto pairs = associate(est, ref, options.max_dt);
  if (pairs.size() < 2) {
    raise(Errc::no_overlap, "compute_metrics: fewer than 2 associated samples");
  }
  const std::size_t n = pairs.size();

  Pose3 alignment = pose_identity();
  if (options.align) {
    std::vector<Vec3> pe, pr;
    pe.reserve(n);
    pr.reserve(n);
    for (const auto& [ei, ri] : pairs) {
      pe.push_back(est[ei].position);
      pr.push_back(ref[ri].position);
    }
    alignment = align_se3(pe, pr);
  }

  MetricReport report;
  report.sample_count = n;

  double sq_sum = 0.0;
  for (const auto& [ei, ri] : pairs) {
    const double err = (pose_apply(alignment, est[ei].position) - ref[ri].position).norm();
    sq_sum += err * err;
    report.ate_max_m = std::max(report.ate_max_m, err);
  }
  report.ate_rmse_m = std::sqrt(sq_sum / static_cast<double>(n));

  // NEES uses the raw (unaligned) error: it tests the filter's own claim
  // about its absolute-frame uncertainty.
  if (est_position_covs != nullptr && !est_position_covs->empty()) {
    double nees_sum = 0.0;
    std::size_t count = 0;
    for (const auto& [ei, ri] : pairs) {
      const Vec3 e = est[ei].position - ref[ri].position;
      const Mat3& P = (*est_position_covs)[ei];
      const double v = e.dot(P.ldlt().solve(e));
      if (std::isfinite(v)) {
        nees_sum += v;
        ++count;
      }
    }
    if (count > 0) report.nees_mean = nees_sum / static_cast<double>(count);
  }

  // RPE: relative motion over exactly rpe_distance_m of reference arc
  // length, the endpoint interpolated between samples; error is the
  // translation/rotation of the discrepancy transform, normalized per
  // meter of actual distance.
  std::vector<double> arc(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    arc[k] = arc[k - 1] +
             (ref[pairs[k].second].position - ref[pairs[k - 1].second].position).norm();
  }
  double trans_sq = 0.0;
  double rot_sq = 0.0;
  std::size_t rpe_count = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = arc[k] + options.rpe_distance_m;
    if (m < k + 1) m = k + 1;
    while (m < n && arc[m] < target) ++m;
    if (m >= n) break;  // not enough travel left
    const double seg = arc[m] - arc[m - 1];
    const double u = seg > 0.0 ? (target - arc[m - 1]) / seg : 1.0;
    const Pose3 ref_end =
        interpolate_pose(ref[pairs[m - 1].second], ref[pairs[m].second], u);
    const Pose3 est_end = interpolate_pose(est[pairs[m - 1].first], est[pairs[m].first], u);
    const Pose3 rel_ref = pose_compose(pose_inverse(state_pose(ref[pairs[k].second])), ref_end);
    const Pose3 rel_est = pose_compose(pose_inverse(state_pose(est[pairs[k].first])), est_end);
    const Pose3 disc = pose_compose(pose_inverse(rel_ref), rel_est);
    const double dist = options.rpe_distance_m;
    const double te = disc.translation.norm() / dist;
    const double re = quat_angle(disc.rotation) * 180.0 / M_PI / dist;
    trans_sq += te * te;
    rot_sq += re * re;
    ++rpe_count;
  }
  if (rpe_count > 0) {
    report.rpe_trans_rmse_m_per_m = std::sqrt(trans_sq / static_cast<double>(rpe_count));
    report.rpe_rot_rmse_deg_per_m = std::sqrt(rot_sq / static_cast<double>(rpe_count));
  }
  return report;
}

void emit_plots(const std::vector<NavState>& est, const std::vector<NavState>& ref,
                const MetricReport& report, const std::string& out_dir,
                const MetricOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    raise(Errc::io_error, "emit_plots: cannot create " + out_dir + ": " + ec.message());
  }

  const auto pairs = associate(est, ref, options.max_dt);
  Pose3 alignment = pose_identity();
  if (options.align && pairs.size() >= 3) {
    std::vector<Vec3> pe, pr;
    for (const auto& [ei, ri] : pairs) {
      pe.push_back(est[ei].position);
      pr.push_back(ref[ri].position);
    }
    alignment = align_se3(pe, pr);
  }

  SvgSeries ref_xy;
  ref_xy.color = "#555555";
  ref_xy.label = "reference";
  for (const auto& s : ref) {
    ref_xy.x.push_back(s.position.x());
    ref_xy.y.push_back(s.position.y());
  }
  SvgSeries est_xy;
  est_xy.color = "#d62728";
  est_xy.label = "estimate (aligned)";
  for (const auto& s : est) {
    const Vec3 p = pose_apply(alignment, s.position);
    est_xy.x.push_back(p.x());
    est_xy.y.push_back(p.y());
  }
  SvgPlotOptions path_opts;
  path_opts.title = "Trajectory (top-down)";
  path_opts.x_label = "east x [m]";
  path_opts.y_label = "north y [m]";
  path_opts.equal_aspect = true;
  write_svg_plot((fs::path(out_dir) / "path_xy.svg").string(), {ref_xy, est_xy}, path_opts);

  SvgSeries err_series;
  err_series.color = "#d62728";
  err_series.label = "position error";
  for (const auto& [ei, ri] : pairs) {
    err_series.x.push_back(ref[ri].t);
    err_series.y.push_back((pose_apply(alignment, est[ei].position) - ref[ri].position).norm());
  }
  SvgPlotOptions err_opts;
  err_opts.title = "Position error over time";
  err_opts.x_label = "t [s]";
  err_opts.y_label = "error [m]";
  write_svg_plot((fs::path(out_dir) / "error_time.svg").string(), {err_series}, err_opts);

  const fs::path report_path = fs::path(out_dir) / "report.txt";
  std::ofstream f(report_path, std::ios::binary);
  if (!f) {
    raise(Errc::io_error, "emit_plots: cannot open " + report_path.string());
  }
  f << "ate_rmse_m: " << shortest(report.ate_rmse_m) << "\n"
    << "ate_max_m: " << shortest(report.ate_max_m) << "\n"
    << "rpe_trans_rmse_m_per_m: " << shortest(report.rpe_trans_rmse_m_per_m) << "\n"
    << "rpe_rot_rmse_deg_per_m: " << shortest(report.rpe_rot_rmse_deg_per_m) << "\n"
    << "nees_mean: " << shortest(report.nees_mean) << "\n"
    << "sample_count: " << report.sample_count << "\n";
  if (!f) {
    raise(Errc::io_error, "emit_plots: write failed for " + report_path.string());
  }
}

}  // namespace mms
