#include "mms/scenarios.hpp"

#include <cmath>
#include <set>

#include "mms/errors.hpp"
#include "mms/random.hpp"

namespace mms {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Deterministic sub-decimeter jitter so landmark fields are not perfect
/// grids (perfect grids make degenerate RANSAC samples far more likely).
/// Keyed by scenario salt and landmark index, independent of the run seed:
/// the world is part of the scenario, not of one simulation run.
Vec3 grid_jitter(std::uint64_t salt, std::uint64_t index, double amplitude) {
  std::uint64_t h = derive_seed(salt, index);
  auto u = [&](int k) {
    return (static_cast<double>((h >> (k * 21)) & 0x1FFFFF) / 0x1FFFFF - 0.5) * 2.0;
  };
  return amplitude * Vec3(u(0), u(1), u(2));
}

struct LandmarkBuilder {
  std::vector<Landmark>& out;
  std::uint64_t salt;
  double jitter;

  void add(const Vec3& p) {
    Landmark lm;
    lm.id = static_cast<std::int64_t>(out.size());
    lm.position = p + grid_jitter(salt, out.size(), jitter);
    out.push_back(lm);
  }

  /// Points every `spacing` meters along the segment a->b, at each height.
  void wall(const Vec3& a, const Vec3& b, double spacing, const std::vector<double>& heights) {
    double len = (b - a).norm();
    int n = std::max(2, static_cast<int>(std::floor(len / spacing)) + 1);
    for (int i = 0; i < n; ++i) {
      Vec3 base = a + (b - a) * (static_cast<double>(i) / (n - 1));
      for (double h : heights) add(Vec3(base.x(), base.y(), h));
    }
  }
};

/// Headings that face each waypoint toward its successor.
void face_forward(std::vector<Waypoint>& wps, bool closed) {
  std::size_t n = wps.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = (i + 1 < n) ? i + 1 : (closed ? 0 : i);
    Vec3 d = wps[j].position - wps[(j == i) ? i - 1 : i].position;
    wps[i].yaw = std::atan2(d.y(), d.x());
  }
}

/// Scales the path speed so one full lap takes the given time.
void time_lap(TrajectorySpec& spec, double lap_seconds) {
  spec.speed_mps = 1.0;
  PathSampler probe(spec);
  spec.speed_mps = probe.length() / lap_seconds;
}

/// Construction-time validation: landmark ids unique/sorted and at least 50
/// distinct landmarks actually visible somewhere along the trajectory.
void validate_scenario(const Scenario& s) {
  for (std::size_t i = 0; i + 1 < s.world.landmarks.size(); ++i) {
    if (s.world.landmarks[i].id >= s.world.landmarks[i + 1].id) {
      raise(Errc::config_error, "scenario landmarks must have unique ascending ids");
    }
  }
  PathSampler path(s.spec);
  std::set<std::int64_t> seen;
  for (double t = 0.0; t <= path.duration(); t += 0.5) {
    GroundTruth g = path.sample(t);
    for (const auto& lm : s.world.landmarks) {
      if (in_frustum(s.params.camera, world_to_camera(g.pose, s.params.camera, lm.position))) {
        seen.insert(lm.id);
      }
    }
  }
  if (seen.size() < 50) {
    raise(Errc::config_error,
          "scenario '" + s.name + "' exposes only " + std::to_string(seen.size()) +
              " landmarks along its trajectory (needs >= 50)");
  }
}

Scenario build_apartment() {
  Scenario s;
  s.name = "apartment";
  s.world.bounds = Box{Vec3(0, 0, 0), Vec3(8, 7, 2.5)};
  s.world.default_env = GnssEnvironment::denied;  // indoors: no usable sky view

  LandmarkBuilder lb{s.world.landmarks, /*salt=*/11, /*jitter=*/0.08};
  std::vector<double> heights{0.5, 1.0, 1.5, 2.0};
  lb.wall(Vec3(0, 0, 0), Vec3(8, 0, 0), 0.6, heights);   // south wall
  lb.wall(Vec3(0, 7, 0), Vec3(8, 7, 0), 0.6, heights);   // north wall
  lb.wall(Vec3(0, 0, 0), Vec3(0, 7, 0), 0.6, heights);   // west wall
  lb.wall(Vec3(8, 0, 0), Vec3(8, 7, 0), 0.6, heights);   // east wall
  // Interior clutter: a kitchen island, a bookshelf, a table.
  lb.wall(Vec3(2.5, 3.2, 0), Vec3(4.0, 3.2, 0), 0.5, {0.4, 0.9});
  lb.wall(Vec3(5.8, 4.5, 0), Vec3(5.8, 6.2, 0), 0.5, {0.6, 1.2, 1.8});
  lb.wall(Vec3(1.5, 4.8, 0), Vec3(2.6, 4.8, 0), 0.5, {0.75});

  // Counter-clockwise lap at walking height, a meter clear of the walls.
  auto& wp = s.spec.waypoints;
  double z = 1.2;
  wp.push_back({Vec3(1.2, 1.2, z), 0});
  wp.push_back({Vec3(4.0, 1.0, z), 0});
  wp.push_back({Vec3(6.8, 1.2, z), 0});
  wp.push_back({Vec3(7.0, 3.5, z), 0});
  wp.push_back({Vec3(6.8, 5.8, z), 0});
  wp.push_back({Vec3(4.0, 6.0, z), 0});
  wp.push_back({Vec3(1.2, 5.8, z), 0});
  wp.push_back({Vec3(1.0, 3.5, z), 0});
  s.spec.closed = true;
  face_forward(wp, true);
  time_lap(s.spec, 60.0);

  s.params.datum.anchor = GeodeticCoord{40.0, -3.0, 650.0};
  validate_scenario(s);
  return s;
}

Scenario build_multifloor() {
  Scenario s;
  s.name = "multifloor";
  s.world.bounds = Box{Vec3(0, 0, 0), Vec3(20, 5, 5.5)};
  s.world.default_env = GnssEnvironment::denied;

  LandmarkBuilder lb{s.world.landmarks, /*salt=*/22, /*jitter=*/0.08};
  std::vector<double> lower{0.4, 1.0, 1.6, 2.2};
  std::vector<double> upper{3.4, 4.0, 4.6, 5.2};
  lb.wall(Vec3(0, 0, 0), Vec3(20, 0, 0), 0.6, lower);    // lower corridor, outer wall
  lb.wall(Vec3(0, 2.5, 0), Vec3(20, 2.5, 0), 0.6, lower);  // lower corridor, inner wall
  lb.wall(Vec3(0, 2.5, 0), Vec3(20, 2.5, 0), 0.6, upper);  // upper corridor, inner wall
  lb.wall(Vec3(0, 5, 0), Vec3(20, 5, 0), 0.6, upper);    // upper corridor, outer wall
  // Stairwell end walls span both levels.
  lb.wall(Vec3(0, 0, 0), Vec3(0, 5, 0), 0.5, {0.8, 1.6, 2.4, 3.2, 4.0, 4.8});
  lb.wall(Vec3(20, 0, 0), Vec3(20, 5, 0), 0.5, {0.8, 1.6, 2.4, 3.2, 4.0, 4.8});

  // Lap: east along the lower corridor, up the east stairs, west along the
  // upper corridor, down the west stairs. Two z-levels, 3 m apart.
  auto& wp = s.spec.waypoints;
  wp.push_back({Vec3(2.0, 1.25, 1.2), 0});
  wp.push_back({Vec3(7.0, 1.25, 1.2), 0});
  wp.push_back({Vec3(12.0, 1.25, 1.2), 0});
  wp.push_back({Vec3(17.0, 1.25, 1.2), 0});
  wp.push_back({Vec3(19.2, 2.5, 2.7), 0});   // east staircase, mid landing
  wp.push_back({Vec3(17.0, 3.75, 4.2), 0});
  wp.push_back({Vec3(12.0, 3.75, 4.2), 0});
  wp.push_back({Vec3(7.0, 3.75, 4.2), 0});
  wp.push_back({Vec3(2.0, 3.75, 4.2), 0});
  wp.push_back({Vec3(0.8, 2.5, 2.7), 0});    // west staircase, mid landing
  s.spec.closed = true;
  face_forward(wp, true);
  time_lap(s.spec, 60.0);

  s.params.datum.anchor = GeodeticCoord{40.001, -3.001, 650.0};
  validate_scenario(s);
  return s;
}

Scenario build_outdoor() {
  Scenario s;
  s.name = "outdoor";
  s.world.bounds = Box{Vec3(-20, -20, 0), Vec3(20, 20, 6)};
  s.world.default_env = GnssEnvironment::open_sky;
  // Reception degrades in the shadow strip along the building's north face.
  s.world.regions.push_back(
      GnssRegion{Box{Vec3(-7.5, 5.0, 0), Vec3(7.5, 12.0, 6)}, GnssEnvironment::degraded});

  LandmarkBuilder lb{s.world.landmarks, /*salt=*/33, /*jitter=*/0.1};
  std::vector<double> wall_h{0.5, 1.5, 2.5, 3.5};
  // Building facade, 15 x 10 m footprint centered at the origin.
  lb.wall(Vec3(-7.5, -5, 0), Vec3(7.5, -5, 0), 0.6, wall_h);
  lb.wall(Vec3(-7.5, 5, 0), Vec3(7.5, 5, 0), 0.6, wall_h);
  lb.wall(Vec3(-7.5, -5, 0), Vec3(-7.5, 5, 0), 0.6, wall_h);
  lb.wall(Vec3(7.5, -5, 0), Vec3(7.5, 5, 0), 0.6, wall_h);
  // Ring of posts/trees around the path.
  for (int i = 0; i < 24; ++i) {
    double a = 2.0 * kPi * i / 24;
    Vec3 base(17.0 * std::cos(a), 17.0 * std::sin(a), 0.0);
    for (double h : {0.8, 1.8, 2.8}) lb.add(Vec3(base.x(), base.y(), h));
  }

  // Loop around the building, roughly 5-6 m off the facade.
  auto& wp = s.spec.waypoints;
  double z = 1.2;
  wp.push_back({Vec3(13, 0, z), 0});
  wp.push_back({Vec3(13, 6, z), 0});
  wp.push_back({Vec3(9, 10, z), 0});
  wp.push_back({Vec3(0, 11, z), 0});
  wp.push_back({Vec3(-9, 10, z), 0});
  wp.push_back({Vec3(-13, 6, z), 0});
  wp.push_back({Vec3(-13, 0, z), 0});
  wp.push_back({Vec3(-13, -6, z), 0});
  wp.push_back({Vec3(-9, -10, z), 0});
  wp.push_back({Vec3(0, -11, z), 0});
  wp.push_back({Vec3(9, -10, z), 0});
  wp.push_back({Vec3(13, -6, z), 0});
  s.spec.closed = true;
  face_forward(wp, true);
  time_lap(s.spec, 60.0);

  // The receiver runs RTK outdoors; corrections are modeled as the
  // centimeter-sigma fixed mode.
  s.params.gnss.mode = GnssMode::rtk_fixed;
  s.params.datum.anchor = GeodeticCoord{40.0, -3.0, 650.0};
  validate_scenario(s);
  return s;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"apartment", "multifloor", "outdoor"};
  return names;
}

Scenario build_scenario(const std::string& name) {
  if (name == "apartment") return build_apartment();
  if (name == "multifloor") return build_multifloor();
  if (name == "outdoor") return build_outdoor();
  std::string known;
  for (const auto& n : scenario_names()) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  raise(Errc::unknown_scenario, "unknown scenario '" + name + "' (known: " + known + ")");
}

}  // namespace mms
