#pragma once

#include <string>
#include <vector>

#include "mms/simulation.hpp"

namespace mms {

/// A ready-to-simulate setup: environment, path, and default sensor params.
struct Scenario {
  std::string name;
  World world;
  TrajectorySpec spec;
  SimParams params;
};

/// Known names: "apartment" (8x7x2.5 m indoor loop, GNSS denied),
/// "multifloor" (two corridors joined by two staircases, GNSS denied),
/// "outdoor" (40x40 m loop around a 15x10 m building, open sky with a
/// degraded strip beside the building, RTK-grade receiver).
/// All paths are closed loops timed to 60 s at their default speed.
/// Throws UnknownScenario for anything else.
Scenario build_scenario(const std::string& name);

const std::vector<std::string>& scenario_names();

}  // namespace mms
