#include "mms/log_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/logging.hpp"
#include "mms/slam.hpp"

namespace mms {

namespace {

using nlohmann::json;

// ---- shortest round-trip number formatting (locale-independent) ------------

void append_num(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw json::other_error::create(501, "expected 3-array", &j);
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json quat_to_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

Quat quat_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw json::other_error::create(501, "expected 4-array", &j);
  return Quat{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json record_to_json(const SensorRecord& rec) {
  json j;
  switch (record_kind(rec)) {
    case RecordKind::imu: {
      const auto& s = std::get<ImuSample>(rec);
      j["accel"] = vec3_to_json(s.accel);
      j["gyro"] = vec3_to_json(s.gyro);
      j["kind"] = "IMU";
      j["t"] = s.t;
      break;
    }
    case RecordKind::mag: {
      const auto& s = std::get<MagSample>(rec);
      j["field"] = vec3_to_json(s.field);
      j["kind"] = "MAG";
      j["t"] = s.t;
      break;
    }
    case RecordKind::depth: {
      const auto& s = std::get<DepthFrame>(rec);
      json obs = json::array();
      for (const auto& o : s.observations) {
        obs.push_back(json::array(
            {o.landmark_id, o.point.x(), o.point.y(), o.point.z()}));
      }
      j["kind"] = "DEPTH";
      j["obs"] = std::move(obs);
      j["t"] = s.t;
      break;
    }
    case RecordKind::gnss: {
      const auto& s = std::get<GnssFix>(rec);
      j["alt"] = s.coord.altitude_m;
      j["hsig"] = s.horizontal_sigma_m;
      j["kind"] = "GNSS";
      j["lat"] = s.coord.latitude_deg;
      j["lon"] = s.coord.longitude_deg;
      j["mode"] = gnss_mode_name(s.mode);
      j["t"] = s.t;
      j["vsig"] = s.vertical_sigma_m;
      break;
    }
    case RecordKind::truth: {
      const auto& s = std::get<GroundTruth>(rec);
      j["kind"] = "TRUTH";
      j["p"] = vec3_to_json(s.pose.translation);
      j["q"] = quat_to_json(s.pose.rotation);
      j["t"] = s.t;
      j["v"] = vec3_to_json(s.velocity);
      break;
    }
  }
  return j;
}

SensorRecord record_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  double t = j.at("t").get<double>();
  if (kind == "IMU") {
    ImuSample s;
    s.t = t;
    s.gyro = vec3_from_json(j.at("gyro"));
    s.accel = vec3_from_json(j.at("accel"));
    return s;
  }
  if (kind == "MAG") {
    MagSample s;
    s.t = t;
    s.field = vec3_from_json(j.at("field"));
    return s;
  }
  if (kind == "DEPTH") {
    DepthFrame s;
    s.t = t;
    const json& obs = j.at("obs");
    if (!obs.is_array()) throw json::other_error::create(501, "obs must be an array", &j);
    s.observations.reserve(obs.size());
    for (const auto& o : obs) {
      if (!o.is_array() || o.size() != 4) {
        throw json::other_error::create(501, "observation must be [id,x,y,z]", &j);
      }
      DepthObservation d;
      d.landmark_id = o[0].get<std::int64_t>();
      d.point = Vec3(o[1].get<double>(), o[2].get<double>(), o[3].get<double>());
      s.observations.push_back(d);
    }
    return s;
  }
  if (kind == "GNSS") {
    GnssFix s;
    s.t = t;
    s.coord.latitude_deg = j.at("lat").get<double>();
    s.coord.longitude_deg = j.at("lon").get<double>();
    s.coord.altitude_m = j.at("alt").get<double>();
    s.horizontal_sigma_m = j.at("hsig").get<double>();
    s.vertical_sigma_m = j.at("vsig").get<double>();
    std::string mode = j.at("mode").get<std::string>();
    if (!parse_gnss_mode(mode, s.mode)) {
      throw json::other_error::create(501, "unknown gnss mode '" + mode + "'", &j);
    }
    return s;
  }
  if (kind == "TRUTH") {
    GroundTruth s;
    s.t = t;
    s.pose.translation = vec3_from_json(j.at("p"));
    s.pose.rotation = quat_from_json(j.at("q"));
    s.velocity = vec3_from_json(j.at("v"));
    return s;
  }
  throw json::other_error::create(501, "unknown record kind '" + kind + "'", &j);
}

[[noreturn]] void format_error(const std::string& path, std::size_t line_no, const std::string& why) {
  std::ostringstream oss;
  oss << path << ":" << line_no << ": " << why;
  raise(Errc::format_error, oss.str());
}

}  // namespace

const char* record_kind_name(RecordKind k) {
  switch (k) {
    case RecordKind::imu: return "IMU";
    case RecordKind::mag: return "MAG";
    case RecordKind::depth: return "DEPTH";
    case RecordKind::gnss: return "GNSS";
    case RecordKind::truth: return "TRUTH";
  }
  return "?";
}

double record_time(const SensorRecord& r) {
  return std::visit([](const auto& rec) { return rec.t; }, r);
}

RecordKind record_kind(const SensorRecord& r) {
  struct Visitor {
    RecordKind operator()(const ImuSample&) const { return RecordKind::imu; }
    RecordKind operator()(const MagSample&) const { return RecordKind::mag; }
    RecordKind operator()(const DepthFrame&) const { return RecordKind::depth; }
    RecordKind operator()(const GnssFix&) const { return RecordKind::gnss; }
    RecordKind operator()(const GroundTruth&) const { return RecordKind::truth; }
  };
  return std::visit(Visitor{}, r);
}

void write_log(const std::string& path, const SensorLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot open '" + path + "' for writing");

  json header;
  header["datum"] = {
      {"altitude_m", log.header.datum.anchor.altitude_m},
      {"latitude_deg", log.header.datum.anchor.latitude_deg},
      {"longitude_deg", log.header.datum.anchor.longitude_deg},
  };
  header["format_version"] = log.header.format_version;
  header["scenario"] = log.header.scenario;
  header["seed"] = log.header.seed;
  out << header.dump() << '\n';

  for (const auto& rec : log.records) {
    out << record_to_json(rec).dump() << '\n';
  }
  out.flush();
  if (!out) raise(Errc::io_error, "write failed for '" + path + "'");
}

SensorLog read_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open '" + path + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) raise(Errc::io_error, "read failed for '" + path + "'");
  bool ends_with_newline = !content.empty() && content.back() == '\n';

  SensorLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  double prev_t = -std::numeric_limits<double>::infinity();
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    bool last_line = (nl == std::string::npos);
    std::string line = content.substr(pos, last_line ? std::string::npos : nl - pos);
    pos = last_line ? content.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;

    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      if (last_line && !ends_with_newline) {
        MMS_WARN("'" << path << "': dropping truncated final line " << line_no);
        break;
      }
      format_error(path, line_no, "not valid JSON");
    }

    if (!have_header) {
      if (!j.is_object() || !j.contains("format_version")) {
        format_error(path, line_no, "first line must be a header with format_version");
      }
      int version = j["format_version"].is_number_integer() ? j["format_version"].get<int>() : -1;
      if (version != 1) {
        format_error(path, line_no, "unsupported format_version (expected 1)");
      }
      try {
        log.header.format_version = version;
        log.header.scenario = j.value("scenario", std::string());
        log.header.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("datum")) {
          const json& d = j["datum"];
          log.header.datum.anchor.latitude_deg = d.at("latitude_deg").get<double>();
          log.header.datum.anchor.longitude_deg = d.at("longitude_deg").get<double>();
          log.header.datum.anchor.altitude_m = d.at("altitude_m").get<double>();
        }
      } catch (const json::exception& e) {
        format_error(path, line_no, e.what());
      }
      have_header = true;
      continue;
    }

    SensorRecord rec;
    try {
      rec = record_from_json(j);
    } catch (const json::exception& e) {
      if (last_line && !ends_with_newline) {
        MMS_WARN("'" << path << "': dropping truncated final line " << line_no);
        break;
      }
      format_error(path, line_no, e.what());
    }
    double t = record_time(rec);
    if (t < prev_t) {
      std::ostringstream oss;
      oss << path << ":" << line_no << ": timestamp " << t << " decreases from " << prev_t;
      raise(Errc::unsorted_log, oss.str());
    }
    prev_t = t;
    log.records.push_back(std::move(rec));
  }
  if (!have_header) {
    format_error(path, line_no == 0 ? 1 : line_no, "missing header line");
  }
  return log;
}

void export_trajectory_csv(const std::vector<NavState>& states, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot open '" + path + "' for writing");
  std::string buf = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz\n";
  for (const auto& s : states) {
    double fields[11] = {s.t,
                         s.position.x(), s.position.y(), s.position.z(),
                         s.orientation.w, s.orientation.x, s.orientation.y, s.orientation.z,
                         s.velocity.x(), s.velocity.y(), s.velocity.z()};
    for (int i = 0; i < 11; ++i) {
      if (i) buf.push_back(',');
      append_num(buf, fields[i]);
    }
    buf.push_back('\n');
  }
  out << buf;
  out.flush();
  if (!out) raise(Errc::io_error, "write failed for '" + path + "'");
}

std::vector<NavState> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open '" + path + "' for reading");
  std::vector<NavState> states;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz") {
        format_error(path, line_no, "unexpected CSV header");
      }
      continue;
    }
    if (line.empty()) continue;
    double fields[11];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 11; ++i) {
      if (i) {
        if (p >= end || *p != ',') format_error(path, line_no, "expected 11 comma-separated fields");
        ++p;
      }
      auto res = std::from_chars(p, end, fields[i]);
      if (res.ec != std::errc{}) format_error(path, line_no, "bad number");
      p = res.ptr;
    }
    if (p != end) format_error(path, line_no, "trailing characters");
    NavState s;
    s.t = fields[0];
    s.position = Vec3(fields[1], fields[2], fields[3]);
    s.orientation = Quat{fields[4], fields[5], fields[6], fields[7]};
    s.velocity = Vec3(fields[8], fields[9], fields[10]);
    states.push_back(s);
  }
  if (in.bad()) raise(Errc::io_error, "read failed for '" + path + "'");
  return states;
}

void export_ply(const PointCloud& cloud, const std::string& path) {
  for (const auto& p : cloud.points) {
    if (!p.allFinite()) {
      raise(Errc::non_finite_point, "point cloud contains NaN/inf coordinates");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_error, "cannot open '" + path + "' for writing");
  std::string buf;
  buf += "ply\nformat ascii 1.0\nelement vertex ";
  buf += std::to_string(cloud.points.size());
  buf += "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : cloud.points) {
    append_num(buf, p.x());
    buf.push_back(' ');
    append_num(buf, p.y());
    buf.push_back(' ');
    append_num(buf, p.z());
    buf.push_back('\n');
  }
  out << buf;
  out.flush();
  if (!out) raise(Errc::io_error, "write failed for '" + path + "'");
}

}  // namespace mms
