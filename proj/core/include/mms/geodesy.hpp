#pragma once

#include <string>

#include "mms/geometry.hpp"

namespace mms {

// WGS84 ellipsoid.
inline constexpr double kWgs84A = 6378137.0;                 // semi-major axis, m
inline constexpr double kWgs84F = 1.0 / 298.257223563;       // flattening
inline constexpr double kWgs84B = kWgs84A * (1.0 - kWgs84F); // semi-minor axis, m

struct GeodeticCoord {
  double latitude_deg = 0.0;   // [-90, 90]
  double longitude_deg = 0.0;  // (-180, 180]
  double altitude_m = 0.0;     // ellipsoidal height
};

/// Origin of the local ENU frame; set once per run before any conversion.
struct Datum {
  GeodeticCoord anchor;
};

enum class GnssMode { standard, rtk_float, rtk_fixed, no_fix };

const char* gnss_mode_name(GnssMode m);
bool parse_gnss_mode(const std::string& name, GnssMode& out);

/// One-sigma measurement noise for a receiver mode: horizontal, vertical.
/// RTK is modeled purely as a smaller sigma; correction streams are out of
/// scope. Vertical is twice horizontal, the usual geometry-dilution ratio.
void gnss_default_sigmas(GnssMode mode, double& horizontal_m, double& vertical_m);

struct GnssFix {
  double t = 0.0;  // seconds
  GeodeticCoord coord;
  double horizontal_sigma_m = 0.0;
  double vertical_sigma_m = 0.0;
  GnssMode mode = GnssMode::no_fix;
};

/// Throws InvalidCoordinate if lat/lon are outside their ranges or not finite.
void validate_coord(const GeodeticCoord& c);

/// Closed-form WGS84 geodetic -> Earth-centered Earth-fixed.
Vec3 geodetic_to_ecef(const GeodeticCoord& c);

/// ECEF -> local east/north/up at the datum anchor. The anchor maps to zero.
Vec3 ecef_to_enu(const Vec3& p_ecef, const Datum& datum);

/// Inverse of ecef_to_enu.
Vec3 enu_to_ecef(const Vec3& p_enu, const Datum& datum);

/// ECEF -> geodetic by fixed-point iteration on latitude; sub-micrometer
/// converged. The simulator uses this to emit fixes from metric ground truth.
GeodeticCoord ecef_to_geodetic(const Vec3& p_ecef);

GeodeticCoord enu_to_geodetic(const Vec3& p_enu, const Datum& datum);

/// GNSS fix -> local position plus measurement covariance
/// diag(h_sigma^2, h_sigma^2, v_sigma^2). Throws NoFix when mode == no_fix.
void fix_to_local(const GnssFix& fix, const Datum& datum, Vec3& position, Mat3& covariance);

}  // namespace mms
