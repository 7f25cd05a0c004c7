#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "panoreg/errors.hpp"
#include "panoreg/fusion.hpp"
#include "panoreg/metrics.hpp"
#include "panoreg/pose.hpp"
#include "panoreg/registration.hpp"
#include "panoreg/scene.hpp"

namespace panoreg {

// On-disk formats. JSON for scenes/maps/poses/layouts (human-diffable),
// CSV for metric tables. Every document carries format_version and a type
// tag; unknown versions are rejected outright since these files serve as
// long-lived fixtures. nlohmann serializes doubles with the shortest
// decimal that round-trips exactly, so load(save(x)) == x bit for bit.

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::json;

enum class MapsProvenance { kOracle, kPerturbed, kExternal };

inline std::string provenance_name(MapsProvenance p) {
  switch (p) {
    case MapsProvenance::kOracle: return "oracle";
    case MapsProvenance::kPerturbed: return "perturbed";
    case MapsProvenance::kExternal: return "external";
  }
  return "external";
}

inline MapsProvenance provenance_from_name(const std::string& name) {
  if (name == "oracle") return MapsProvenance::kOracle;
  if (name == "perturbed") return MapsProvenance::kPerturbed;
  if (name == "external") return MapsProvenance::kExternal;
  throw Error(ErrorCode::kSchemaError, "unknown provenance '" + name + "'");
}

struct MapsPair {
  HorizonMaps pano1;
  HorizonMaps pano2;
  MapsProvenance provenance = MapsProvenance::kExternal;

  std::size_t grid_n() const { return pano1.size(); }
};

namespace io_detail {

inline const Json& require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kSchemaError, std::string("missing field '") + key + "'");
  }
  return *it;
}

inline void check_header(const Json& j, const char* expected_type) {
  const Json& version = require(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw Error(ErrorCode::kSchemaError, "unsupported format_version");
  }
  const Json& type = require(j, "type");
  if (!type.is_string() || type.get<std::string>() != expected_type) {
    throw Error(ErrorCode::kSchemaError,
                std::string("expected document type '") + expected_type + "'");
  }
}

inline std::vector<double> double_array(const Json& j, const char* key, std::size_t expect_n) {
  const Json& arr = require(j, key);
  if (!arr.is_array() || (expect_n > 0 && arr.size() != expect_n)) {
    throw Error(ErrorCode::kSchemaError, std::string("field '") + key + "' has the wrong shape");
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (const Json& v : arr) {
    if (!v.is_number()) {
      throw Error(ErrorCode::kSchemaError, std::string("field '") + key + "' must be numeric");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

inline Vec2 vec2_field(const Json& j, const char* key) {
  const std::vector<double> v = double_array(j, key, 2);
  return Vec2{v[0], v[1]};
}

inline Json vec2_json(const Vec2& v) { return Json::array({v.x, v.z}); }

inline Json ring_json(const Ring& r) {
  Json arr = Json::array();
  for (const Vec2& p : r) arr.push_back(vec2_json(p));
  return arr;
}

inline Ring ring_from_json(const Json& arr, const char* what) {
  if (!arr.is_array() || arr.size() < 3) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + " must be an array of >= 3 points");
  }
  Ring r;
  r.reserve(arr.size());
  for (const Json& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorCode::kSchemaError, std::string(what) + " points must be [x, z]");
    }
    r.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return r;
}

}  // namespace io_detail

inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out) throw Error(ErrorCode::kIoError, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "rename failed: " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  atomic_write_file(path, j.dump(2) + "\n");
}

// ---- scene pair files ----

inline Json scene_to_json(const RoomScene& scene, std::size_t grid_n) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "scene_pair";
  j["room"] = io_detail::ring_json(scene.room.vertices);
  j["cam1"] = Json{{"position", io_detail::vec2_json(scene.cam1.position)},
                   {"yaw", scene.cam1.yaw}};
  j["cam2"] = Json{{"position", io_detail::vec2_json(scene.cam2.position)},
                   {"yaw", scene.cam2.yaw}};
  j["ceiling_height"] = scene.ceiling_height;
  j["grid_n"] = grid_n;
  return j;
}

inline std::pair<RoomScene, std::size_t> scene_from_json(const Json& j) {
  io_detail::check_header(j, "scene_pair");
  RoomScene scene;
  scene.room = RoomPolygon::from_ring(io_detail::ring_from_json(io_detail::require(j, "room"), "room"));
  auto read_cam = [&](const char* key) {
    const Json& c = io_detail::require(j, key);
    Camera cam;
    cam.position = io_detail::vec2_field(c, "position");
    const Json& yaw = io_detail::require(c, "yaw");
    if (!yaw.is_number()) throw Error(ErrorCode::kSchemaError, "camera yaw must be numeric");
    cam.yaw = yaw.get<double>();
    if (!point_in_ring(scene.room.vertices, cam.position)) {
      throw Error(ErrorCode::kSchemaError, std::string(key) + " is not inside the room");
    }
    return cam;
  };
  scene.cam1 = read_cam("cam1");
  scene.cam2 = read_cam("cam2");
  const Json& h = io_detail::require(j, "ceiling_height");
  if (!h.is_number() || !(h.get<double>() > 1.0)) {
    throw Error(ErrorCode::kSchemaError, "ceiling_height must be > 1 (camera height is 1)");
  }
  scene.ceiling_height = h.get<double>();
  const Json& n = io_detail::require(j, "grid_n");
  if (!n.is_number_unsigned() || n.get<std::size_t>() < 4) {
    throw Error(ErrorCode::kSchemaError, "grid_n must be an integer >= 4");
  }
  return {std::move(scene), n.get<std::size_t>()};
}

// ---- horizon map files ----

inline Json maps_to_json(const MapsPair& maps) {
  auto one = [](const HorizonMaps& m) {
    return Json{{"ceiling", m.ceiling.values},
                {"floor", m.floor.values},
                {"correspondence", m.correspondence},
                {"covisibility", m.covisibility}};
  };
  Json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "horizon_maps";
  j["grid_n"] = maps.grid_n();
  j["provenance"] = provenance_name(maps.provenance);
  j["pano1"] = one(maps.pano1);
  j["pano2"] = one(maps.pano2);
  return j;
}

inline MapsPair maps_from_json(const Json& j) {
  io_detail::check_header(j, "horizon_maps");
  const Json& n_json = io_detail::require(j, "grid_n");
  if (!n_json.is_number_unsigned() || n_json.get<std::size_t>() < 4) {
    throw Error(ErrorCode::kSchemaError, "grid_n must be an integer >= 4");
  }
  const std::size_t n = n_json.get<std::size_t>();
  auto one = [&](const char* key) {
    const Json& m = io_detail::require(j, key);
    HorizonMaps maps;
    maps.ceiling.kind = BoundaryKind::kCeiling;
    maps.ceiling.values = io_detail::double_array(m, "ceiling", n);
    maps.floor.kind = BoundaryKind::kFloor;
    maps.floor.values = io_detail::double_array(m, "floor", n);
    maps.correspondence = io_detail::double_array(m, "correspondence", n);
    maps.covisibility = io_detail::double_array(m, "covisibility", n);
    for (double v : maps.ceiling.values) {
      if (!(v < 0.0) || !(v > -1.0)) {
        throw Error(ErrorCode::kSchemaError, "ceiling values must lie in (-1, 0)");
      }
    }
    for (double v : maps.floor.values) {
      if (!(v > 0.0) || !(v < 1.0)) {
        throw Error(ErrorCode::kSchemaError, "floor values must lie in (0, 1)");
      }
    }
    for (double o : maps.correspondence) {
      if (!(o >= 0.0) || !(o < 1.0)) {
        throw Error(ErrorCode::kSchemaError, "correspondence values must lie in [0, 1)");
      }
    }
    for (double c : maps.covisibility) {
      if (!(c >= 0.0) || !(c <= 1.0)) {
        throw Error(ErrorCode::kSchemaError, "covisibility values must lie in [0, 1]");
      }
    }
    return maps;
  };
  MapsPair pair;
  pair.pano1 = one("pano1");
  pair.pano2 = one("pano2");
  pair.provenance = provenance_from_name(io_detail::require(j, "provenance").get<std::string>());
  return pair;
}

// ---- pose files ----

inline Json pose_result_to_json(const RegistrationResult& r) {
  std::size_t n_inliers = 0;
  for (bool b : r.inlier_mask) n_inliers += b ? 1 : 0;
  Json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "pose";
  j["success"] = true;
  j["theta_deg"] = degrees(r.pose.theta);
  j["t"] = io_detail::vec2_json(r.pose.t);
  j["scale"] = r.scale;
  j["rmse"] = r.rmse;
  j["n_inliers"] = n_inliers;
  j["n_candidates"] = r.n_candidates;
  return j;
}

inline Json pose_failure_to_json(const Error& e) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "pose";
  j["success"] = false;
  j["error"] = e.what();
  return j;
}

struct PoseFile {
  bool success = false;
  PlanarPose pose;
  double scale = 1.0;
  double rmse = 0.0;
  std::size_t n_inliers = 0;
};

inline PoseFile pose_from_json(const Json& j) {
  io_detail::check_header(j, "pose");
  PoseFile out;
  const Json& success = io_detail::require(j, "success");
  if (!success.is_boolean()) throw Error(ErrorCode::kSchemaError, "success must be boolean");
  out.success = success.get<bool>();
  if (!out.success) return out;
  const Json& theta = io_detail::require(j, "theta_deg");
  if (!theta.is_number()) throw Error(ErrorCode::kSchemaError, "theta_deg must be numeric");
  out.pose = PlanarPose(radians(theta.get<double>()), io_detail::vec2_field(j, "t"));
  out.scale = io_detail::require(j, "scale").get<double>();
  out.rmse = io_detail::require(j, "rmse").get<double>();
  out.n_inliers = io_detail::require(j, "n_inliers").get<std::size_t>();
  return out;
}

// ---- layout files ----

inline Json layout_to_json(const LayoutSolid& layout) {
  Json parts = Json::array();
  for (const PolygonWithHoles& part : layout.footprint.parts) {
    Json holes = Json::array();
    for (const Ring& hole : part.holes) holes.push_back(io_detail::ring_json(hole));
    parts.push_back(Json{{"outer", io_detail::ring_json(part.outer)}, {"holes", holes}});
  }
  Json j;
  j["format_version"] = kFormatVersion;
  j["type"] = "layout";
  j["height"] = layout.height;
  j["footprint"] = parts;
  j["disconnected"] = layout.disconnected;
  j["repaired"] = layout.repaired;
  return j;
}

inline LayoutSolid layout_from_json(const Json& j) {
  io_detail::check_header(j, "layout");
  LayoutSolid layout;
  const Json& h = io_detail::require(j, "height");
  if (!h.is_number() || !(h.get<double>() > 0.0)) {
    throw Error(ErrorCode::kSchemaError, "layout height must be positive");
  }
  layout.height = h.get<double>();
  const Json& parts = io_detail::require(j, "footprint");
  if (!parts.is_array() || parts.empty()) {
    throw Error(ErrorCode::kSchemaError, "footprint must be a non-empty array");
  }
  for (const Json& part : parts) {
    PolygonWithHoles p;
    p.outer = io_detail::ring_from_json(io_detail::require(part, "outer"), "outer ring");
    if (!ring_is_ccw(p.outer)) std::reverse(p.outer.begin(), p.outer.end());
    for (const Json& hole : io_detail::require(part, "holes")) {
      Ring r = io_detail::ring_from_json(hole, "hole ring");
      if (ring_is_ccw(r)) std::reverse(r.begin(), r.end());
      p.holes.push_back(std::move(r));
    }
    layout.footprint.parts.push_back(std::move(p));
  }
  layout.disconnected = io_detail::require(j, "disconnected").get<bool>();
  layout.repaired = io_detail::require(j, "repaired").get<bool>();
  return layout;
}

// ---- extruded mesh (Wavefront-style, for inspection) ----

inline std::string layout_to_obj(const LayoutSolid& layout) {
  char buf[128];
  std::string out = "# extruded layout, floor at y=-1\n";
  int base = 0;
  for (const PolygonWithHoles& part : layout.footprint.parts) {
    const Ring& ring = part.outer;
    const int n = static_cast<int>(ring.size());
    const double y0 = -1.0;
    const double y1 = layout.height - 1.0;
    for (const Vec2& p : ring) {
      std::snprintf(buf, sizeof(buf), "v %.9f %.9f %.9f\n", p.x, y0, p.z);
      out += buf;
    }
    for (const Vec2& p : ring) {
      std::snprintf(buf, sizeof(buf), "v %.9f %.9f %.9f\n", p.x, y1, p.z);
      out += buf;
    }
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      std::snprintf(buf, sizeof(buf), "f %d %d %d %d\n", base + i + 1, base + j + 1,
                    base + n + j + 1, base + n + i + 1);
      out += buf;
    }
    out += "f";
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), " %d", base + i + 1);
      out += buf;
    }
    out += "\nf";
    for (int i = n - 1; i >= 0; --i) {
      std::snprintf(buf, sizeof(buf), " %d", base + n + i + 1);
      out += buf;
    }
    out += "\n";
    base += 2 * n;
  }
  return out;
}

// ---- metrics CSV ----

inline std::string format_metric(double v) {
  char buf[64];
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// One row per pair plus an aggregate footer. Aggregate angular errors are
// means over successful pairs; IoU/delta means run over all pairs (failed
// registrations keep their zeros); mAA values appear in the header
// comments together with the metric conventions.
inline std::string metrics_to_csv(const MetricsReport& report) {
  std::string out;
  out += "# panoreg metrics report\n";
  out += "# maa: mean over integer sub-thresholds 1..T degrees; failures count 0\n";
  out += "# delta: threshold accuracy with ratio bound 1.25^1\n";
  if (!report.pairs.empty()) {
    out += "# r_maa5=" + format_metric(report.r_maa(5)) + "\n";
    out += "# r_maa10=" + format_metric(report.r_maa(10)) + "\n";
    out += "# t_maa5=" + format_metric(report.t_maa(5)) + "\n";
    out += "# t_maa10=" + format_metric(report.t_maa(10)) + "\n";
  }
  out += "scene_id,rot_err_deg,trans_ang_err_deg,iou2d,iou3d,delta1,success\n";
  for (const PairRecord& p : report.pairs) {
    out += p.scene_id + "," + format_metric(p.errors.rot_err) + "," +
           format_metric(p.errors.trans_ang_err) + "," + format_metric(p.iou2d) + "," +
           format_metric(p.iou3d) + "," + format_metric(p.delta1) + "," +
           (p.success ? "1" : "0") + "\n";
  }
  if (!report.pairs.empty()) {
    const double success_rate = static_cast<double>(report.success_count()) /
                                static_cast<double>(report.pairs.size());
    out += "aggregate," +
           format_metric(report.mean_over_successful([](const PairRecord& p) {
             return p.errors.rot_err;
           })) +
           "," +
           format_metric(report.mean_over_successful([](const PairRecord& p) {
             return p.errors.trans_ang_err;
           })) +
           "," + format_metric(report.mean_over_all([](const PairRecord& p) { return p.iou2d; })) +
           "," + format_metric(report.mean_over_all([](const PairRecord& p) { return p.iou3d; })) +
           "," +
           format_metric(report.mean_over_all([](const PairRecord& p) { return p.delta1; })) +
           "," + format_metric(success_rate) + "\n";
  }
  return out;
}

}  // namespace panoreg
