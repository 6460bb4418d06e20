#include "doctest.h"

#include <cmath>

#include "mms/errors.hpp"
#include "mms/geodesy.hpp"
#include "mms/random.hpp"

#include "oracles.hpp"

using namespace mms;

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

GeodeticCoord random_coord(GaussianSampler& rng) {
  GeodeticCoord c;
  c.latitude_deg = -89.5 + rng.uniform01() * 179.0;
  c.longitude_deg = -179.5 + rng.uniform01() * 359.0;
  c.altitude_m = -400.0 + rng.uniform01() * 9000.0;
  return c;
}

}  // namespace

TEST_CASE("geodetic to ECEF matches the ellipsoid definition") {
  GaussianSampler rng(201);
  for (int i = 0; i < 500; ++i) {
    const GeodeticCoord c = random_coord(rng);
    oracle::Geodetic g;
    g.lat_rad = c.latitude_deg * kDeg;
    g.lon_rad = c.longitude_deg * kDeg;
    g.alt_m = c.altitude_m;
    CHECK((geodetic_to_ecef(c) - oracle::ecef_from_geodetic(g)).norm() < 1e-6);
  }
}

TEST_CASE("geodetic round trip through ECEF is below a micrometer") {
  GaussianSampler rng(202);
  for (int i = 0; i < 500; ++i) {
    const GeodeticCoord c = random_coord(rng);
    const Vec3 ecef = geodetic_to_ecef(c);
    const GeodeticCoord back = ecef_to_geodetic(ecef);
    // Compare in metric space (angles scale with the earth radius).
    CHECK((geodetic_to_ecef(back) - ecef).norm() < 1e-6);
    CHECK(back.latitude_deg == doctest::Approx(c.latitude_deg).epsilon(1e-9));
    CHECK(back.altitude_m == doctest::Approx(c.altitude_m).epsilon(1e-6).scale(1.0));
  }
  // Independent inverse agrees too.
  for (int i = 0; i < 200; ++i) {
    const GeodeticCoord c = random_coord(rng);
    const Vec3 ecef = geodetic_to_ecef(c);
    const oracle::Geodetic g = oracle::geodetic_from_ecef(ecef);
    CHECK(g.lat_rad / kDeg == doctest::Approx(c.latitude_deg).epsilon(1e-9));
    CHECK(g.lon_rad / kDeg == doctest::Approx(c.longitude_deg).epsilon(1e-9));
    CHECK(g.alt_m == doctest::Approx(c.altitude_m).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("equator and pole anchors hit their closed forms") {
  // On the equator at zero longitude: x = a + h, y = z = 0.
  GeodeticCoord eq;
  eq.latitude_deg = 0.0;
  eq.longitude_deg = 0.0;
  eq.altitude_m = 0.0;
  Vec3 p = geodetic_to_ecef(eq);
  CHECK(std::abs(p.x() - kWgs84A) < 1e-6);
  CHECK(std::abs(p.y()) < 1e-6);
  CHECK(std::abs(p.z()) < 1e-6);

  eq.altitude_m = 123.25;
  p = geodetic_to_ecef(eq);
  CHECK(std::abs(p.x() - (kWgs84A + 123.25)) < 1e-6);

  // Equator at 90 east swings onto the y axis.
  eq.longitude_deg = 90.0;
  eq.altitude_m = 0.0;
  p = geodetic_to_ecef(eq);
  CHECK(std::abs(p.x()) < 1e-6);
  CHECK(std::abs(p.y() - kWgs84A) < 1e-6);

  // North pole: z = b + h.
  GeodeticCoord np;
  np.latitude_deg = 90.0;
  np.longitude_deg = 0.0;
  np.altitude_m = 50.0;
  p = geodetic_to_ecef(np);
  CHECK(std::abs(p.x()) < 1e-6);
  CHECK(std::abs(p.y()) < 1e-6);
  CHECK(std::abs(p.z() - (kWgs84B + 50.0)) < 1e-6);

  // South pole mirrors it.
  np.latitude_deg = -90.0;
  p = geodetic_to_ecef(np);
  CHECK(std::abs(p.z() + (kWgs84B + 50.0)) < 1e-6);
}

TEST_CASE("ENU conversions invert each other and anchor at zero") {
  GaussianSampler rng(203);
  Datum datum;
  datum.anchor.latitude_deg = 47.3967;
  datum.anchor.longitude_deg = 8.5500;
  datum.anchor.altitude_m = 440.0;

  // The anchor itself maps to the origin.
  CHECK(ecef_to_enu(geodetic_to_ecef(datum.anchor), datum).norm() < 1e-6);

  for (int i = 0; i < 300; ++i) {
    const Vec3 enu(rng.sample() * 500.0, rng.sample() * 500.0, rng.sample() * 50.0);
    const Vec3 ecef = enu_to_ecef(enu, datum);
    CHECK((ecef_to_enu(ecef, datum) - enu).norm() < 1e-6);
    // Geodetic route agrees with the direct route.
    const GeodeticCoord g = enu_to_geodetic(enu, datum);
    CHECK((geodetic_to_ecef(g) - ecef).norm() < 1e-6);
  }

  // A northward ENU step changes latitude, not longitude; scale agrees with
  // the independent great-circle distance.
  const Vec3 north(0.0, 1000.0, 0.0);
  const GeodeticCoord g = enu_to_geodetic(north, datum);
  CHECK(g.latitude_deg > datum.anchor.latitude_deg);
  CHECK(g.longitude_deg == doctest::Approx(datum.anchor.longitude_deg).epsilon(1e-7));
  const double d = oracle::haversine_m(datum.anchor.latitude_deg * kDeg,
                                       datum.anchor.longitude_deg * kDeg, g.latitude_deg * kDeg,
                                       g.longitude_deg * kDeg);
  CHECK(d == doctest::Approx(1000.0).epsilon(5e-3));
}

TEST_CASE("coordinate validation rejects out-of-range and non-finite input") {
  GeodeticCoord c;
  c.latitude_deg = 91.0;
  CHECK_THROWS_AS(validate_coord(c), Error);
  c.latitude_deg = 45.0;
  c.longitude_deg = 181.0;
  CHECK_THROWS_AS(validate_coord(c), Error);
  c.longitude_deg = 10.0;
  c.altitude_m = std::nan("");
  CHECK_THROWS_AS(validate_coord(c), Error);
  c.altitude_m = 0.0;
  CHECK_NOTHROW(validate_coord(c));
}

TEST_CASE("fixes convert to local measurements with their stated covariance") {
  Datum datum;
  datum.anchor.latitude_deg = -33.8568;
  datum.anchor.longitude_deg = 151.2153;
  datum.anchor.altitude_m = 10.0;

  const Vec3 truth(12.5, -8.0, 3.0);
  GnssFix fix;
  fix.t = 1.0;
  fix.coord = enu_to_geodetic(truth, datum);
  fix.horizontal_sigma_m = 0.25;
  fix.vertical_sigma_m = 0.5;
  fix.mode = GnssMode::standard;

  Vec3 z;
  Mat3 R;
  fix_to_local(fix, datum, z, R);
  CHECK((z - truth).norm() < 1e-6);
  CHECK(R(0, 0) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(R(1, 1) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(R(2, 2) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(R(0, 1)) + std::abs(R(0, 2)) + std::abs(R(1, 2)) == 0.0);

  fix.mode = GnssMode::no_fix;
  CHECK_THROWS_AS(fix_to_local(fix, datum, z, R), Error);
  fix.mode = GnssMode::standard;
  fix.horizontal_sigma_m = 0.0;
  CHECK_THROWS_AS(fix_to_local(fix, datum, z, R), Error);
}

TEST_CASE("receiver modes parse and carry sane default noise") {
  GnssMode m = GnssMode::no_fix;
  CHECK(parse_gnss_mode("standard", m));
  CHECK(m == GnssMode::standard);
  CHECK(parse_gnss_mode("rtk_fixed", m));
  CHECK(m == GnssMode::rtk_fixed);
  CHECK(!parse_gnss_mode("bogus", m));

  double h_std = 0.0, v_std = 0.0;
  gnss_default_sigmas(GnssMode::standard, h_std, v_std);
  double h_rtk = 0.0, v_rtk = 0.0;
  gnss_default_sigmas(GnssMode::rtk_fixed, h_rtk, v_rtk);
  CHECK(h_std > h_rtk);
  CHECK(h_rtk > 0.0);
  // Vertical is the documented 2x horizontal.
  CHECK(v_std == doctest::Approx(2.0 * h_std));
  CHECK(v_rtk == doctest::Approx(2.0 * h_rtk));
  CHECK(std::string(gnss_mode_name(GnssMode::rtk_float)) == "rtk_float");
}
