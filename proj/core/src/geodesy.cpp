#include "mms/geodesy.hpp"

#include <cmath>

#include "mms/errors.hpp"

namespace mms {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
constexpr double kE2 = kWgs84F * (2.0 - kWgs84F);  // first eccentricity squared

// ENU basis rows (east, north, up) at a geodetic anchor, as a rotation from
// ECEF deltas into the local frame.
Mat3 enu_rotation(const GeodeticCoord& anchor) {
  double lat = anchor.latitude_deg * kDegToRad;
  double lon = anchor.longitude_deg * kDegToRad;
  double sl = std::sin(lat), cl = std::cos(lat);
  double so = std::sin(lon), co = std::cos(lon);
  Mat3 r;
  r << -so, co, 0.0,
      -sl * co, -sl * so, cl,
      cl * co, cl * so, sl;
  return r;
}

}  // namespace

const char* gnss_mode_name(GnssMode m) {
  switch (m) {
    case GnssMode::standard: return "standard";
    case GnssMode::rtk_float: return "rtk_float";
    case GnssMode::rtk_fixed: return "rtk_fixed";
    case GnssMode::no_fix: return "no_fix";
  }
  return "?";
}

bool parse_gnss_mode(const std::string& name, GnssMode& out) {
  if (name == "standard") out = GnssMode::standard;
  else if (name == "rtk_float") out = GnssMode::rtk_float;
  else if (name == "rtk_fixed") out = GnssMode::rtk_fixed;
  else if (name == "no_fix") out = GnssMode::no_fix;
  else return false;
  return true;
}

void gnss_default_sigmas(GnssMode mode, double& horizontal_m, double& vertical_m) {
  switch (mode) {
    case GnssMode::standard: horizontal_m = 1.5; break;
    case GnssMode::rtk_float: horizontal_m = 0.3; break;
    case GnssMode::rtk_fixed: horizontal_m = 0.02; break;
    case GnssMode::no_fix: horizontal_m = 0.0; break;
  }
  vertical_m = 2.0 * horizontal_m;
}

void validate_coord(const GeodeticCoord& c) {
  if (!std::isfinite(c.latitude_deg) || !std::isfinite(c.longitude_deg) ||
      !std::isfinite(c.altitude_m)) {
    raise(Errc::invalid_coordinate, "non-finite geodetic component");
  }
  if (c.latitude_deg < -90.0 || c.latitude_deg > 90.0) {
    raise(Errc::invalid_coordinate, "latitude outside [-90, 90]");
  }
  if (c.longitude_deg <= -180.0 || c.longitude_deg > 180.0) {
    raise(Errc::invalid_coordinate, "longitude outside (-180, 180]");
  }
}

Vec3 geodetic_to_ecef(const GeodeticCoord& c) {
  validate_coord(c);
  double lat = c.latitude_deg * kDegToRad;
  double lon = c.longitude_deg * kDegToRad;
  double sl = std::sin(lat), cl = std::cos(lat);
  double so = std::sin(lon), co = std::cos(lon);
  double n = kWgs84A / std::sqrt(1.0 - kE2 * sl * sl);  // prime-vertical radius
  double h = c.altitude_m;
  return Vec3((n + h) * cl * co, (n + h) * cl * so, (n * (1.0 - kE2) + h) * sl);
}

Vec3 ecef_to_enu(const Vec3& p_ecef, const Datum& datum) {
  return enu_rotation(datum.anchor) * (p_ecef - geodetic_to_ecef(datum.anchor));
}

Vec3 enu_to_ecef(const Vec3& p_enu, const Datum& datum) {
  return geodetic_to_ecef(datum.anchor) + enu_rotation(datum.anchor).transpose() * p_enu;
}

GeodeticCoord ecef_to_geodetic(const Vec3& p) {
  GeodeticCoord out;
  double rho = std::hypot(p.x(), p.y());  // distance from the rotation axis
  out.longitude_deg = (rho < 1e-9) ? 0.0 : std::atan2(p.y(), p.x()) * kRadToDeg;
  if (rho < 1e-9) {
    // On the axis the latitude is a pole and height measures along z.
    out.latitude_deg = (p.z() >= 0.0) ? 90.0 : -90.0;
    out.altitude_m = std::abs(p.z()) - kWgs84B;
    return out;
  }
  // Fixed-point iteration on latitude; converges to sub-micrometer in a few
  // steps everywhere off the poles.
  double lat = std::atan2(p.z(), rho * (1.0 - kE2));
  double h = 0.0;
  for (int i = 0; i < 20; ++i) {
    double sl = std::sin(lat);
    double n = kWgs84A / std::sqrt(1.0 - kE2 * sl * sl);
    double h_new = rho / std::cos(lat) - n;
    double lat_new = std::atan2(p.z(), rho * (1.0 - kE2 * n / (n + h_new)));
    bool done = std::abs(lat_new - lat) < 1e-14 && std::abs(h_new - h) < 1e-9;
    lat = lat_new;
    h = h_new;
    if (done) break;
  }
  out.latitude_deg = lat * kRadToDeg;
  out.altitude_m = h;
  return out;
}

GeodeticCoord enu_to_geodetic(const Vec3& p_enu, const Datum& datum) {
  return ecef_to_geodetic(enu_to_ecef(p_enu, datum));
}

void fix_to_local(const GnssFix& fix, const Datum& datum, Vec3& position, Mat3& covariance) {
  if (fix.mode == GnssMode::no_fix) {
    raise(Errc::no_fix, "fix has no position solution");
  }
  if (!(fix.horizontal_sigma_m > 0.0) || !(fix.vertical_sigma_m > 0.0)) {
    raise(Errc::invalid_coordinate, "fix sigmas must be positive");
  }
  position = ecef_to_enu(geodetic_to_ecef(fix.coord), datum);
  double h2 = fix.horizontal_sigma_m * fix.horizontal_sigma_m;
  double v2 = fix.vertical_sigma_m * fix.vertical_sigma_m;
  covariance = Vec3(h2, h2, v2).asDiagonal();
}

}  // namespace mms
