// Independent reference implementations used to cross-check the library.
//
// Everything in this file is deliberately written from first principles with
// different algorithms than the production code (direction-cosine matrices
// instead of quaternion algebra, Bowring's method instead of the closed-form
// inverse, chord-sum arc length instead of quadrature, Horn's eigenvalue
// method instead of SVD, and so on), so that agreement between the two is
// meaningful evidence rather than a tautology.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// --- rotations via direction-cosine matrices -------------------------------

// Rotation matrix from a unit quaternion (w, x, y, z), textbook DCM formula.
Mat3 dcm_from_quat(double w, double x, double y, double z);

// Rotation matrix for a rotation of `angle` radians about unit `axis`,
// via the Rodrigues formula.
Mat3 dcm_from_axis_angle(const Vec3& axis, double angle);

// Rotation angle of a rotation matrix, from its trace.
double dcm_angle(const Mat3& R);

// --- geodesy ----------------------------------------------------------------

struct Geodetic {
  double lat_rad = 0.0;
  double lon_rad = 0.0;
  double alt_m = 0.0;
};

// WGS-84 geodetic -> ECEF, straight from the ellipsoid definition.
Vec3 ecef_from_geodetic(const Geodetic& g);

// ECEF -> geodetic via Bowring's single-iteration method followed by two
// fixed-point refinements (sub-micrometer for terrestrial altitudes).
Geodetic geodetic_from_ecef(const Vec3& ecef);

// Great-circle distance on the WGS-84 mean sphere (haversine). Useful only
// as a consistency scale check for small ENU displacements.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

// --- probability ------------------------------------------------------------

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Chi-square CDF with k degrees of freedom.
double chi2_cdf(double x, int k);

// Chi-square quantile via bisection on the CDF.
double chi2_quantile(double p, int k);

// Standard normal CDF.
double normal_cdf(double z);

// --- rigid alignment ---------------------------------------------------------

struct RigidOracle {
  Mat3 rotation;
  Vec3 translation;
};

// Horn's closed-form absolute orientation (unit-quaternion eigenvalue method):
// finds R, t minimizing sum ||dst_k - (R * src_k + t)||^2.
RigidOracle horn_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

// Iterative Gauss-Newton fit of the same objective with numerically
// differenced Jacobians, started from identity. Independent of both the SVD
// route and Horn's method.
RigidOracle gauss_newton_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                               int iterations = 60);

// --- curves ------------------------------------------------------------------

// Arc length of a curve by chord summation with interval doubling until the
// estimate changes by less than `tol`.
double chord_arc_length(const std::function<Vec3(double)>& position, double t0, double t1,
                        double tol = 1e-9);

// --- trajectory metrics (naive implementations) ------------------------------

struct PoseSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  // Unit quaternion, (w, x, y, z).
  std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};
};

// Root-mean-square and max of position error over index-paired samples,
// optionally after applying a fixed rigid transform to the estimate.
struct AteOracle {
  double rmse = 0.0;
  double max = 0.0;
};
AteOracle brute_force_ate(const std::vector<PoseSample>& est, const std::vector<PoseSample>& ref,
                          const Mat3& R, const Vec3& t);

// --- file formats -------------------------------------------------------------

// Minimal ASCII PLY vertex reader (x, y, z properties, doubles or floats).
std::vector<Vec3> read_ply_vertices(const std::string& path);

// --- calculus ------------------------------------------------------------------

// Central-difference Jacobian of f: R^n -> R^m around x.
Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h = 1e-6);

}  // namespace oracle
