// SPDX-License-Identifier: Apache-2.0
//
// On-disk frame bundle: one capture as a directory of small text files plus
// a binary PPM.
//
//   intrinsics.json   {"width","height","fx","fy","cx","cy","k1","k2","k3"}
//   rgb.ppm           P6, maxval 255
//   cloud.csv         header "X,Y,Z", one depth-frame point per line
//   poses.json        {"trajectory":[{"t","tx","ty","tz","qw","qx","qy","qz"},...],
//                      "depth_to_color":{"tx","ty","tz","qw","qx","qy","qz"}}
//   meta.json         {"format_version":1,"t_rgb","t_depth"}
//   detections.json   optional [{"label","score","x_min","y_min","x_max","y_max"}]
//
// Trajectory poses map the color-camera (device) frame into the world frame.
// depth_to_color maps depth-sensor coordinates into the color-camera frame.
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "rgbd_size/camera.hpp"
#include "rgbd_size/error.hpp"
#include "rgbd_size/image.hpp"
#include "rgbd_size/segment.hpp"

namespace rgbd {

inline constexpr int kBundleFormatVersion = 1;

struct FrameBundle {
  CameraIntrinsics intrinsics;
  Image rgb;
  std::vector<MetricPoint> cloud;  // depth-sensor frame
  std::vector<RigidPose> trajectory;
  RigidPose depth_to_color;
  double t_rgb = 0.0;
  double t_depth = 0.0;
  std::optional<std::vector<DetectionBox>> detections;

  // Load diagnostics; not part of the bundle content.
  std::size_t dropped_cloud_rows = 0;
  std::vector<std::string> warnings;

  friend bool operator==(const FrameBundle& a, const FrameBundle& b) {
    return a.intrinsics == b.intrinsics && a.rgb == b.rgb && a.cloud == b.cloud && a.trajectory == b.trajectory &&
           a.depth_to_color == b.depth_to_color && a.t_rgb == b.t_rgb && a.t_depth == b.t_depth &&
           a.detections == b.detections;
  }
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot open " + path.string() + " for writing");
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.filename().string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ojson parse_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports "line L, column C" in its message.
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
}

inline double number_field(const ojson& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::ParseError, where + ": missing field \"" + key + "\"");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, where + ": field \"" + key + "\" is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::InvariantViolation, where + "." + key + " is not finite");
  return d;
}

inline int int_field(const ojson& obj, const char* key, const std::string& where) {
  const double d = number_field(obj, key, where);
  if (d != std::floor(d) || std::abs(d) > 1e9) {
    throw Error(ErrorCode::InvariantViolation, where + "." + key + " must be an integer");
  }
  return static_cast<int>(d);
}

inline ojson pose_json(const RigidPose& p, bool with_time) {
  ojson j;
  if (with_time) j["t"] = p.timestamp();
  j["tx"] = p.translation().x;
  j["ty"] = p.translation().y;
  j["tz"] = p.translation().z;
  j["qw"] = p.rotation().w;
  j["qx"] = p.rotation().x;
  j["qy"] = p.rotation().y;
  j["qz"] = p.rotation().z;
  return j;
}

inline RigidPose pose_from_json(const ojson& j, bool with_time, const std::string& where) {
  const double t = with_time ? number_field(j, "t", where) : 0.0;
  const Quaternion q{number_field(j, "qw", where), number_field(j, "qx", where), number_field(j, "qy", where),
                     number_field(j, "qz", where)};
  const MetricPoint tr{number_field(j, "tx", where), number_field(j, "ty", where), number_field(j, "tz", where)};
  try {
    return {t, q, tr};
  } catch (const Error&) {
    throw Error(ErrorCode::InvariantViolation, where + ": quaternion has zero norm");
  }
}

inline std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

inline void save_bundle(const std::filesystem::path& dir, const FrameBundle& b) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  using detail::ojson;

  ojson intr;
  intr["width"] = b.intrinsics.width;
  intr["height"] = b.intrinsics.height;
  intr["fx"] = b.intrinsics.fx;
  intr["fy"] = b.intrinsics.fy;
  intr["cx"] = b.intrinsics.cx;
  intr["cy"] = b.intrinsics.cy;
  intr["k1"] = b.intrinsics.k1;
  intr["k2"] = b.intrinsics.k2;
  intr["k3"] = b.intrinsics.k3;
  detail::write_text(dir / "intrinsics.json", detail::dump(intr));

  write_ppm(dir / "rgb.ppm", b.rgb);

  std::string csv = "X,Y,Z\n";
  csv.reserve(b.cloud.size() * 64);
  for (const auto& p : b.cloud) {
    csv += detail::format_double(p.x);
    csv += ',';
    csv += detail::format_double(p.y);
    csv += ',';
    csv += detail::format_double(p.z);
    csv += '\n';
  }
  detail::write_text(dir / "cloud.csv", csv);

  ojson poses;
  poses["trajectory"] = ojson::array();
  for (const auto& p : b.trajectory) poses["trajectory"].push_back(detail::pose_json(p, true));
  poses["depth_to_color"] = detail::pose_json(b.depth_to_color, false);
  detail::write_text(dir / "poses.json", detail::dump(poses));

  ojson meta;
  meta["format_version"] = kBundleFormatVersion;
  meta["t_rgb"] = b.t_rgb;
  meta["t_depth"] = b.t_depth;
  detail::write_text(dir / "meta.json", detail::dump(meta));

  if (b.detections) {
    ojson dets = ojson::array();
    for (const auto& d : *b.detections) {
      ojson j;
      j["label"] = d.label;
      j["score"] = d.score;
      j["x_min"] = d.x_min;
      j["y_min"] = d.y_min;
      j["x_max"] = d.x_max;
      j["y_max"] = d.y_max;
      dets.push_back(j);
    }
    detail::write_text(dir / "detections.json", detail::dump(dets));
  } else {
    std::error_code ec;
    fs::remove(dir / "detections.json", ec);
  }
}

inline FrameBundle load_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingFile, dir.string());
  for (const char* required : {"intrinsics.json", "rgb.ppm", "cloud.csv", "poses.json", "meta.json"}) {
    if (!fs::exists(dir / required)) throw Error(ErrorCode::MissingFile, required);
  }

  FrameBundle b;
  {
    const auto j = detail::parse_json(dir / "intrinsics.json");
    const std::string w = "intrinsics.json";
    b.intrinsics = {detail::int_field(j, "width", w), detail::int_field(j, "height", w),
                    detail::number_field(j, "fx", w), detail::number_field(j, "fy", w),
                    detail::number_field(j, "cx", w), detail::number_field(j, "cy", w),
                    detail::number_field(j, "k1", w), detail::number_field(j, "k2", w),
                    detail::number_field(j, "k3", w)};
    b.intrinsics.validate();
  }

  b.rgb = read_ppm(dir / "rgb.ppm");
  if (b.rgb.width() != b.intrinsics.width || b.rgb.height() != b.intrinsics.height) {
    throw Error(ErrorCode::InvariantViolation, "rgb.ppm dimensions differ from intrinsics width/height");
  }

  {
    const std::string text = detail::read_text(dir / "cloud.csv");
    std::istringstream in(text);
    std::string row;
    int line = 0;
    while (std::getline(in, row)) {
      ++line;
      if (!row.empty() && row.back() == '\r') row.pop_back();
      if (line == 1) {
        if (row != "X,Y,Z") throw Error(ErrorCode::ParseError, "cloud.csv:1: expected header \"X,Y,Z\"");
        continue;
      }
      if (row.empty()) continue;
      const auto c1 = row.find(',');
      const auto c2 = c1 == std::string::npos ? c1 : row.find(',', c1 + 1);
      MetricPoint p;
      const std::string_view sv(row);
      if (c2 == std::string::npos || row.find(',', c2 + 1) != std::string::npos ||
          !detail::parse_double(sv.substr(0, c1), p.x) || !detail::parse_double(sv.substr(c1 + 1, c2 - c1 - 1), p.y) ||
          !detail::parse_double(sv.substr(c2 + 1), p.z)) {
        throw Error(ErrorCode::ParseError, "cloud.csv:" + std::to_string(line) + ": expected three decimal numbers");
      }
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
        throw Error(ErrorCode::ParseError, "cloud.csv:" + std::to_string(line) + ": non-finite coordinate");
      }
      if (!(p.z > 0.0)) {
        ++b.dropped_cloud_rows;
        continue;
      }
      b.cloud.push_back(p);
    }
    if (line == 0) throw Error(ErrorCode::ParseError, "cloud.csv:1: empty file");
    if (b.dropped_cloud_rows > 0) {
      b.warnings.push_back("cloud.csv: dropped " + std::to_string(b.dropped_cloud_rows) + " row(s) with Z <= 0");
    }
  }

  {
    const auto j = detail::parse_json(dir / "poses.json");
    if (!j.is_object() || !j.contains("trajectory") || !j.at("trajectory").is_array()) {
      throw Error(ErrorCode::ParseError, "poses.json: missing array \"trajectory\"");
    }
    const auto& traj = j.at("trajectory");
    for (std::size_t i = 0; i < traj.size(); ++i) {
      b.trajectory.push_back(detail::pose_from_json(traj[i], true, "poses.json trajectory[" + std::to_string(i) + "]"));
    }
    if (b.trajectory.empty()) throw Error(ErrorCode::InvariantViolation, "poses.trajectory is empty");
    for (std::size_t i = 1; i < b.trajectory.size(); ++i) {
      if (!(b.trajectory[i].timestamp() > b.trajectory[i - 1].timestamp())) {
        throw Error(ErrorCode::InvariantViolation, "poses.trajectory timestamps must be strictly increasing");
      }
    }
    if (!j.contains("depth_to_color")) throw Error(ErrorCode::ParseError, "poses.json: missing \"depth_to_color\"");
    b.depth_to_color = detail::pose_from_json(j.at("depth_to_color"), false, "poses.json depth_to_color");
  }

  {
    const auto j = detail::parse_json(dir / "meta.json");
    const int version = detail::int_field(j, "format_version", "meta.json");
    if (version != kBundleFormatVersion) {
      throw Error(ErrorCode::InvariantViolation, "meta.format_version " + std::to_string(version) + " unsupported");
    }
    b.t_rgb = detail::number_field(j, "t_rgb", "meta.json");
    b.t_depth = detail::number_field(j, "t_depth", "meta.json");
  }

  if (fs::exists(dir / "detections.json")) {
    const auto j = detail::parse_json(dir / "detections.json");
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "detections.json: expected an array");
    std::vector<DetectionBox> boxes;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string w = "detections.json[" + std::to_string(i) + "]";
      const auto& d = j[i];
      if (!d.is_object() || !d.contains("label") || !d.at("label").is_string()) {
        throw Error(ErrorCode::ParseError, w + ": missing string field \"label\"");
      }
      DetectionBox box{d.at("label").get<std::string>(), detail::number_field(d, "score", w),
                       detail::number_field(d, "x_min", w), detail::number_field(d, "y_min", w),
                       detail::number_field(d, "x_max", w), detail::number_field(d, "y_max", w)};
      if (!(box.score >= 0.0 && box.score <= 1.0)) throw Error(ErrorCode::InvariantViolation, w + ".score");
      if (!(box.x_min < box.x_max)) throw Error(ErrorCode::InvariantViolation, w + ".x_min");
      if (!(box.y_min < box.y_max)) throw Error(ErrorCode::InvariantViolation, w + ".y_min");
      boxes.push_back(std::move(box));
    }
    b.detections = std::move(boxes);
  }
  return b;
}

}  // namespace rgbd
