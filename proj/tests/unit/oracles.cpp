#include "oracles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oracle {
namespace {

constexpr double kWgs84A = 6378137.0;
constexpr double kWgs84F = 1.0 / 298.257223563;
const double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);

}  // namespace

Mat3 dcm_from_quat(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

Mat3 dcm_from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 u = axis.normalized();
  Mat3 K;
  K << 0, -u.z(), u.y(),  //
      u.z(), 0, -u.x(),   //
      -u.y(), u.x(), 0;
  return Mat3::Identity() + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
}

double dcm_angle(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Vec3 ecef_from_geodetic(const Geodetic& g) {
  const double sin_lat = std::sin(g.lat_rad);
  const double cos_lat = std::cos(g.lat_rad);
  const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sin_lat * sin_lat);
  return Vec3((n + g.alt_m) * cos_lat * std::cos(g.lon_rad),
              (n + g.alt_m) * cos_lat * std::sin(g.lon_rad),
              (n * (1.0 - kWgs84E2) + g.alt_m) * sin_lat);
}

Geodetic geodetic_from_ecef(const Vec3& ecef) {
  const double b = kWgs84A * (1.0 - kWgs84F);
  const double ep2 = (kWgs84A * kWgs84A - b * b) / (b * b);
  const double p = std::hypot(ecef.x(), ecef.y());

  Geodetic g;
  g.lon_rad = std::atan2(ecef.y(), ecef.x());

  // Bowring's parametric-latitude starter.
  double beta = std::atan2(ecef.z() * kWgs84A, p * b);
  double lat = std::atan2(ecef.z() + ep2 * b * std::pow(std::sin(beta), 3),
                          p - kWgs84E2 * kWgs84A * std::pow(std::cos(beta), 3));
  // Two fixed-point refinements.
  for (int i = 0; i < 2; ++i) {
    beta = std::atan2((1.0 - kWgs84F) * std::sin(lat), std::cos(lat));
    lat = std::atan2(ecef.z() + ep2 * b * std::pow(std::sin(beta), 3),
                     p - kWgs84E2 * kWgs84A * std::pow(std::cos(beta), 3));
  }
  g.lat_rad = lat;
  const double sin_lat = std::sin(lat);
  const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sin_lat * sin_lat);
  if (std::abs(std::cos(lat)) > 1e-10) {
    g.alt_m = p / std::cos(lat) - n;
  } else {
    g.alt_m = std::abs(ecef.z()) - b;
  }
  return g;
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  // Mean earth radius consistent with WGS-84 (IUGG R1).
  const double r = kWgs84A * (1.0 - kWgs84F / 3.0);
  const double s1 = std::sin((lat2 - lat1) / 2.0);
  const double s2 = std::sin((lon2 - lon1) / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * r * std::asin(std::min(1.0, std::sqrt(h)));
}

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // Series representation.
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // Continued fraction for Q(a, x), modified Lentz.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  return 1.0 - q;
}

double chi2_cdf(double x, int k) {
  if (x <= 0.0) return 0.0;
  return gamma_p(k / 2.0, x / 2.0);
}

double chi2_quantile(double p, int k) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("chi2_quantile domain");
  double lo = 0.0;
  double hi = 1.0;
  while (chi2_cdf(hi, k) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, k) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

RigidOracle horn_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw std::invalid_argument("horn_align needs >= 3 paired points");
  }
  const auto n = static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero();
  Vec3 cd = Vec3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;

  Mat3 S = Mat3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    S += (src[i] - cs) * (dst[i] - cd).transpose();
  }

  Eigen::Matrix4d N;
  const double sxx = S(0, 0), sxy = S(0, 1), sxz = S(0, 2);
  const double syx = S(1, 0), syy = S(1, 1), syz = S(1, 2);
  const double szx = S(2, 0), szy = S(2, 1), szz = S(2, 2);
  N << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,  //
      syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,   //
      szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,  //
      sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(N);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);  // largest eigenvalue
  RigidOracle out;
  out.rotation = dcm_from_quat(q(0), q(1), q(2), q(3));
  out.translation = cd - out.rotation * cs;
  return out;
}

RigidOracle gauss_newton_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                               int iterations) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw std::invalid_argument("gauss_newton_align needs >= 3 paired points");
  }
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  const auto residuals = [&](const Mat3& Rc, const Vec3& tc) {
    Eigen::VectorXd r(3 * src.size());
    for (size_t i = 0; i < src.size(); ++i) {
      r.segment<3>(3 * static_cast<Eigen::Index>(i)) = dst[i] - (Rc * src[i] + tc);
    }
    return r;
  };

  for (int it = 0; it < iterations; ++it) {
    // Parameters: [t (3), rotation vector increment (3)], applied as
    // R <- R * expm(skew(w)) via the Rodrigues formula.
    const double h = 1e-7;
    Eigen::MatrixXd J(3 * src.size(), 6);
    const Eigen::VectorXd r0 = residuals(R, t);
    for (int col = 0; col < 6; ++col) {
      Vec3 dt = Vec3::Zero();
      Vec3 dw = Vec3::Zero();
      if (col < 3) {
        dt(col) = h;
      } else {
        dw(col - 3) = h;
      }
      const Mat3 Rp =
          dw.norm() > 0.0 ? Mat3(R * dcm_from_axis_angle(dw.normalized(), dw.norm())) : R;
      const Mat3 Rm =
          dw.norm() > 0.0 ? Mat3(R * dcm_from_axis_angle(dw.normalized(), -dw.norm())) : R;
      J.col(col) = (residuals(Rp, t + dt) - residuals(Rm, t - dt)) / (2.0 * h);
    }
    const Eigen::VectorXd step = (J.transpose() * J).ldlt().solve(-J.transpose() * r0);
    t += step.head<3>();
    const Vec3 w = step.tail<3>();
    if (w.norm() > 0.0) R = R * dcm_from_axis_angle(w.normalized(), w.norm());
    if (step.norm() < 1e-14) break;
  }
  RigidOracle out;
  out.rotation = R;
  out.translation = t;
  return out;
}

double chord_arc_length(const std::function<Vec3(double)>& position, double t0, double t1,
                        double tol) {
  double prev = 0.0;
  for (int n = 64; n <= (1 << 22); n *= 2) {
    double len = 0.0;
    Vec3 last = position(t0);
    for (int i = 1; i <= n; ++i) {
      const double t = t0 + (t1 - t0) * static_cast<double>(i) / n;
      const Vec3 cur = position(t);
      len += (cur - last).norm();
      last = cur;
    }
    if (n > 64 && std::abs(len - prev) < tol * std::max(1.0, len)) {
      // Chord sums underestimate; one Richardson step (chords converge O(n^-2)).
      return len + (len - prev) / 3.0;
    }
    prev = len;
  }
  return prev;
}

AteOracle brute_force_ate(const std::vector<PoseSample>& est, const std::vector<PoseSample>& ref,
                          const Mat3& R, const Vec3& t) {
  if (est.size() != ref.size() || est.empty()) {
    throw std::invalid_argument("brute_force_ate needs equal-size non-empty inputs");
  }
  double sum_sq = 0.0;
  double max_e = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    const Vec3 e = (R * est[i].p + t) - ref[i].p;
    sum_sq += e.squaredNorm();
    max_e = std::max(max_e, e.norm());
  }
  AteOracle out;
  out.rmse = std::sqrt(sum_sq / static_cast<double>(est.size()));
  out.max = max_e;
  return out;
}

std::vector<Vec3> read_ply_vertices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  size_t n_vertices = 0;
  bool in_header = true;
  std::vector<std::string> props;
  if (!std::getline(in, line) || line != "ply") throw std::runtime_error("not a ply file");
  while (in_header && std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "element") {
      std::string what;
      ls >> what >> n_vertices;
      if (what != "vertex") throw std::runtime_error("unexpected element: " + what);
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      in_header = false;
    } else if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw std::runtime_error("only ascii ply supported");
    }
  }
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z") {
    throw std::runtime_error("expected x y z vertex properties");
  }
  std::vector<Vec3> out;
  out.reserve(n_vertices);
  for (size_t i = 0; i < n_vertices; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated ply vertex list");
    std::istringstream ls(line);
    Vec3 v;
    if (!(ls >> v.x() >> v.y() >> v.z())) throw std::runtime_error("bad ply vertex line");
    out.push_back(v);
  }
  return out;
}

Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

}  // namespace oracle
