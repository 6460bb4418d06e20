#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "common.hpp"
#include "mms/log_io.hpp"
#include "mms/slam.hpp"

namespace mms::cli {
namespace {

struct Opts {
  std::string log_path;
  std::string traj_path;
  std::string out_dir;
  std::string config_path;
  CLI::Option* out_opt = nullptr;
};

int run(const Opts& o) {
  RunConfig cfg = base_config(o.config_path);
  if (o.out_opt->count() > 0) cfg.out_dir = o.out_dir;

  const SensorLog log = read_log(o.log_path);
  const std::vector<NavState> traj = read_trajectory_csv(o.traj_path);
  std::vector<DepthFrame> frames;
  for (const auto& rec : log.records) {
    if (const auto* f = std::get_if<DepthFrame>(&rec)) {
      frames.push_back(*f);
    }
  }

  const SlamResult res = run_slam(traj, frames, cfg.slam);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    raise(Errc::io_error, "cannot create " + cfg.out_dir + ": " + ec.message());
  }
  export_ply(res.map, (fs::path(cfg.out_dir) / "map.ply").string());

  std::vector<NavState> kf_states;
  kf_states.reserve(res.graph.keyframes.size());
  for (const auto& kf : res.graph.keyframes) {
    NavState s;
    s.t = kf.t;
    s.position = kf.pose.translation;
    s.orientation = kf.pose.rotation;
    s.velocity = Vec3::Zero();
    kf_states.push_back(s);
  }
  export_trajectory_csv(kf_states, (fs::path(cfg.out_dir) / "traj_slam.csv").string());

  std::cout << "keyframes " << res.graph.keyframes.size() << " | edges " << res.graph.edges.size()
            << " (" << res.n_loop_edges << " loop closures)"
            << " | chi2 " << res.chi2_initial << " -> " << res.chi2_final << " in "
            << res.iterations << " iterations"
            << " | map points " << res.map.points.size() << "\n";
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "map.ply").string() << ", traj_slam.csv\n";
  return kExitOk;
}

}  // namespace

void register_slam(CLI::App& app, int& rc) {
  auto opts = std::make_shared<Opts>();
  CLI::App* sub = app.add_subcommand(
      "slam", "Build and optimize the keyframe pose graph, export the point-cloud map");
  sub->add_option("--log", opts->log_path, "Input .vlog sensor log (depth frames)")->required();
  sub->add_option("--traj", opts->traj_path, "Fused trajectory CSV from the fuse step")
      ->required();
  opts->out_opt =
      sub->add_option("--out", opts->out_dir, "Output directory")->default_str(".");
  sub->add_option("--config", opts->config_path, "JSON run-config file");
  sub->callback([opts, &rc] { rc = run_guarded([&] { return run(*opts); }); });
}

}  // namespace mms::cli
