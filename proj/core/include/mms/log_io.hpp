#pragma once

#include <string>
#include <vector>

#include "mms/records.hpp"

namespace mms {

struct PointCloud;  // defined in slam.hpp

/// Writes a sensor log as line-delimited JSON: one header object, then one
/// record object per line. Numbers use shortest round-trip formatting, so
/// read_log(write_log(x)) == x field-for-field and identical inputs produce
/// byte-identical files.
void write_log(const std::string& path, const SensorLog& log);

/// Throws IoError (unreadable), FormatError (bad line, with line number),
/// UnsortedLog (decreasing timestamps, with line number), EmptyLog (no
/// header). A truncated final line is logged as a warning and dropped;
/// everything before it is returned.
SensorLog read_log(const std::string& path);

/// Columns: t,px,py,pz,qw,qx,qy,qz,vx,vy,vz — header row then one row per
/// state. Locale-independent, shortest round-trip numbers.
void export_trajectory_csv(const std::vector<NavState>& states, const std::string& path);

/// Parses a file written by export_trajectory_csv (biases come back zero).
std::vector<NavState> read_trajectory_csv(const std::string& path);

/// ASCII PLY with float x/y/z vertex properties.
/// Throws NonFinitePoint if any coordinate is NaN/inf, IoError on write failure.
void export_ply(const PointCloud& cloud, const std::string& path);

}  // namespace mms
