#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"
#include "mms/log_io.hpp"
#include "mms/pipeline.hpp"

namespace mms::cli {
namespace {

struct Opts {
  std::string log_path;
  std::string out_dir;
  std::string config_path;
  std::string init_mode;
  std::uint64_t seed = 0;
  std::vector<std::string> disable;
  CLI::Option* out_opt = nullptr;
  CLI::Option* init_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_reports_csv(const std::string& path, const std::vector<MeasurementReport>& reports) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    raise(Errc::io_error, "cannot open " + path);
  }
  f << "t,kind,dof,d2,accepted,innovation_norm\n";
  for (const auto& r : reports) {
    f << shortest(r.t) << ',' << measurement_kind_name(r.kind) << ',' << r.dof << ','
      << shortest(r.mahalanobis_d2) << ',' << (r.accepted ? 1 : 0) << ','
      << shortest(r.innovation.norm()) << "\n";
  }
  if (!f) {
    raise(Errc::io_error, "write failed for " + path);
  }
}

int run(const Opts& o) {
  RunConfig cfg = base_config(o.config_path);
  if (o.out_opt->count() > 0) cfg.out_dir = o.out_dir;
  if (o.seed_opt->count() > 0) cfg.seed = o.seed;
  if (o.init_opt->count() > 0) cfg.filter.init_mode = parse_init_mode(o.init_mode);
  for (const auto& d : o.disable) {
    if (d == "vo") {
      cfg.filter.enable_vo = false;
    } else if (d == "gnss") {
      cfg.filter.enable_gnss = false;
    } else if (d == "mag") {
      cfg.filter.enable_mag = false;
    } else {
      raise(Errc::config_error, "--disable expects vo, gnss, or mag (got '" + d + "')");
    }
  }
  cfg.filter.seed = cfg.seed;

  const SensorLog log = read_log(o.log_path);
  const FilterResult res = run_filter(log, cfg.filter);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    raise(Errc::io_error, "cannot create " + cfg.out_dir + ": " + ec.message());
  }
  export_trajectory_csv(res.states, (fs::path(cfg.out_dir) / "traj_est.csv").string());

  std::vector<NavState> truth_states;
  truth_states.reserve(res.truth.size());
  for (const auto& g : res.truth) {
    NavState s;
    s.t = g.t;
    s.position = g.pose.translation;
    s.orientation = g.pose.rotation;
    s.velocity = g.velocity;
    truth_states.push_back(s);
  }
  export_trajectory_csv(truth_states, (fs::path(cfg.out_dir) / "truth.csv").string());
  write_reports_csv((fs::path(cfg.out_dir) / "reports.csv").string(), res.reports);

  std::int64_t accepted = 0;
  for (const auto& r : res.reports) accepted += r.accepted ? 1 : 0;
  std::cout << "states " << res.states.size() << " | predicts " << res.counters.predicts
            << " | updates " << res.reports.size() << " (" << accepted << " accepted)"
            << " | gnss " << res.counters.gnss_updates << " fused, "
            << res.counters.gnss_no_fix_skipped << " no-fix skipped"
            << " | vo " << res.counters.vo_updates << "/" << res.counters.vo_frames << " frames"
            << " | mag " << res.counters.mag_updates << "\n";
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "traj_est.csv").string() << ", truth.csv, reports.csv\n";
  return kExitOk;
}

}  // namespace

void register_fuse(CLI::App& app, int& rc) {
  auto opts = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand("fuse", "Replay a sensor log through the fusion filter");
  sub->add_option("--log", opts->log_path, "Input .vlog sensor log")->required();
  opts->out_opt =
      sub->add_option("--out", opts->out_dir, "Output directory")->default_str(".");
  sub->add_option("--config", opts->config_path, "JSON run-config file");
  opts->init_opt = sub->add_option("--init-mode", opts->init_mode,
                                   "Filter initialization: truth or prior_draw")
                       ->default_str("truth");
  opts->seed_opt = sub->add_option("--seed", opts->seed,
                                   "Seed for the filter's internal draws")
                       ->default_str("0");
  sub->add_option("--disable", opts->disable,
                  "Disable an update source (vo, gnss, mag); repeatable");
  sub->callback([opts, &rc] { rc = run_guarded([&] { return run(*opts); }); });
}

}  // namespace mms::cli
