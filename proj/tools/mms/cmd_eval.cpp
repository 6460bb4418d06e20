#include <array>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"
#include "mms/evaluation.hpp"
#include "mms/log_io.hpp"

namespace mms::cli {
namespace {

std::string shortest(double v) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), p);
}

struct Opts {
  std::string est_path;
  std::string ref_path;
  std::string out_dir;
  std::string config_path;
  double assert_ate = 0.0;
  bool no_align = false;
  CLI::Option* out_opt = nullptr;
  CLI::Option* assert_opt = nullptr;
};

int run(const Opts& o) {
  RunConfig cfg = base_config(o.config_path);
  if (o.out_opt->count() > 0) cfg.out_dir = o.out_dir;
  if (o.no_align) cfg.eval.align = false;

  const std::vector<NavState> est = read_trajectory_csv(o.est_path);
  const std::vector<NavState> ref = read_trajectory_csv(o.ref_path);

  const MetricReport report = compute_metrics(est, ref, nullptr, cfg.eval);
  emit_plots(est, ref, report, cfg.out_dir, cfg.eval);

  std::cout << "ATE rmse " << shortest(report.ate_rmse_m) << " m (max "
            << shortest(report.ate_max_m) << " m) | RPE "
            << shortest(report.rpe_trans_rmse_m_per_m) << " m/m, "
            << shortest(report.rpe_rot_rmse_deg_per_m) << " deg/m | pairs "
            << report.sample_count << "\n";
  std::cout << "wrote " << cfg.out_dir << "/path_xy.svg, error_time.svg, report.txt\n";

  if (o.assert_opt->count() > 0 && report.ate_rmse_m > o.assert_ate) {
    std::cerr << "ATE rmse " << shortest(report.ate_rmse_m) << " m exceeds bound "
              << shortest(o.assert_ate) << " m\n";
    return kExitAssert;
  }
  return kExitOk;
}

}  // namespace

void register_eval(CLI::App& app, int& rc) {
  auto opts = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand(
      "eval", "Compare an estimated trajectory against a reference, emit metrics and plots");
  sub->add_option("--est", opts->est_path, "Estimated trajectory CSV")->required();
  sub->add_option("--ref", opts->ref_path, "Reference trajectory CSV")->required();
  opts->out_opt =
      sub->add_option("--out", opts->out_dir, "Output directory")->default_str(".");
  sub->add_option("--config", opts->config_path, "JSON run-config file");
  opts->assert_opt = sub->add_option(
      "--assert-ate", opts->assert_ate,
      "Exit with status 5 if the ATE RMSE (meters) exceeds this bound");
  sub->add_flag("--no-align", opts->no_align,
                "Skip the rigid alignment of estimate to reference before computing ATE");
  sub->callback([opts, &rc] { rc = run_guarded([&] { return run(*opts); }); });
}

}  // namespace mms::cli
