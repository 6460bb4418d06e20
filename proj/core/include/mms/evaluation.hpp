#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mms/geometry.hpp"
#include "mms/records.hpp"

namespace mms {

struct MetricReport {
  double ate_rmse_m = 0.0;
  double ate_max_m = 0.0;
  double rpe_trans_rmse_m_per_m = 0.0;
  double rpe_rot_rmse_deg_per_m = 0.0;
  double nees_mean = 0.0;  // 0 when no covariances were supplied
  std::size_t sample_count = 0;
};

struct MetricOptions {
  double max_dt = 0.02;        // association tolerance, s
  bool align = true;           // rigid ATE alignment of estimate to reference
  double rpe_distance_m = 1.0; // travel distance per relative-error sample
};

/// Greedy nearest-timestamp association (smallest |dt| first, each index
/// used once), pairs returned in time order. Throws NoOverlap when no pair
/// is within max_dt.
std::vector<std::pair<std::size_t, std::size_t>> associate(const std::vector<NavState>& est,
                                                           const std::vector<NavState>& ref,
                                                           double max_dt = 0.02);

/// Least-squares rigid transform taking est positions onto ref positions.
/// Throws DegenerateGeometry (fewer than 3 points or collinear).
Pose3 align_se3(const std::vector<Vec3>& est_positions, const std::vector<Vec3>& ref_positions);

/// ATE (after optional alignment), RPE per unit distance with the reference
/// interpolated to the exact arc length, and mean position NEES when the
/// filter covariances (parallel to est) are supplied. Throws NoOverlap when
/// fewer than 2 samples associate.
MetricReport compute_metrics(const std::vector<NavState>& est, const std::vector<NavState>& ref,
                             const std::vector<Mat3>* est_position_covs = nullptr,
                             const MetricOptions& options = {});

/// Writes exactly three files into out_dir: path_xy.svg (top-down paths),
/// error_time.svg (position error per associated sample), and report.txt
/// (MetricReport fields as key: value lines). Throws IoError, NoOverlap.
void emit_plots(const std::vector<NavState>& est, const std::vector<NavState>& ref,
                const MetricReport& report, const std::string& out_dir,
                const MetricOptions& options = {});

}  // namespace mms
