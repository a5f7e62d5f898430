// SPDX-License-Identifier: Apache-2.0
//
// End-to-end processing of one frame bundle: alignment, projection,
// densification, segmentation and measurement, plus the JSON report.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rgbd_size/bundle.hpp"
#include "rgbd_size/camera.hpp"
#include "rgbd_size/densify.hpp"
#include "rgbd_size/measure.hpp"
#include "rgbd_size/spatial.hpp"

namespace rgbd {

struct PipelineConfig {
  DensifyConfig densify{InterpMethod::Bilinear, 0.10, std::nullopt, 1};
  MeasureConfig measure;
  bool bench = false;
  int bench_rows = 20;  // rows densified by the linear-scan baseline
};

struct StageTimings {
  double project = 0.0;
  double densify = 0.0;
  double segment = 0.0;
  double measure = 0.0;
};

struct AlignmentStats {
  std::size_t cloud_points = 0;
  std::size_t projected = 0;
  std::size_t dropped_behind = 0;
  std::size_t dropped_outside = 0;
  std::size_t dropped_rows = 0;  // rejected while loading
};

struct BenchResult {
  double tree_ms = 0.0;           // full frame, index build included
  double linear_scan_ms = 0.0;    // `rows` rows only
  int rows = 0;
  double tree_ns_per_pixel = 0.0;
  double linear_scan_ns_per_pixel = 0.0;
  double speedup = 0.0;
  bool outputs_agree = false;  // baseline rows equal the tree rows bit for bit
};

struct Report {
  std::vector<MeasuredObject> objects;
  std::vector<ObjectError> errors;
  StageTimings timings;
  AlignmentStats alignment;
  PipelineConfig config;
  std::optional<BenchResult> bench;
};

struct PipelineResult {
  Report report;
  SparsePixelCloud sparse;
  MetricImage metric;
};

/// Depth-sensor to color-camera transform at the two capture instants.
inline RigidPose align_depth_to_color(const FrameBundle& b) {
  const RigidPose color_pose = interpolate_pose(b.trajectory, b.t_rgb);
  const RigidPose depth_pose = interpolate_pose(b.trajectory, b.t_depth);
  return relative_pose(color_pose, depth_pose) * b.depth_to_color;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline BenchResult run_bench(const SparsePixelCloud& sparse, const DensifyConfig& cfg, const MetricImage& tree_out,
                             double tree_ms, int rows_wanted) {
  BenchResult r;
  const int h = sparse.intrinsics.height;
  const int w = sparse.intrinsics.width;
  const int step = std::max(1, h / std::max(1, rows_wanted));
  std::vector<int> rows;
  for (int y = step / 2; y < h; y += step) rows.push_back(y);

  DensifyConfig single = cfg;
  single.threads = 1;
  const auto start = Clock::now();
  const auto points = resolve_occlusions(sparse);
  const LinearScanIndex scan(points);
  const MetricImage scan_out = densify_with(scan, sparse, single, rows);
  r.linear_scan_ms = ms_since(start);

  r.outputs_agree = true;
  for (int y : rows) {
    for (int x = 0; x < w; ++x) r.outputs_agree = r.outputs_agree && scan_out.at(x, y) == tree_out.at(x, y);
  }
  r.rows = static_cast<int>(rows.size());
  r.tree_ms = tree_ms;
  r.tree_ns_per_pixel = tree_ms * 1e6 / (static_cast<double>(w) * h);
  r.linear_scan_ns_per_pixel = r.linear_scan_ms * 1e6 / (static_cast<double>(w) * r.rows);
  r.speedup = r.linear_scan_ns_per_pixel / r.tree_ns_per_pixel;
  return r;
}

}  // namespace detail

/// Throws rgbd::Error for bundle-level failures (nothing projects into the
/// image, empty trajectory); per-object failures are recorded in the report.
inline PipelineResult run_pipeline(const FrameBundle& bundle, const PipelineConfig& cfg) {
  using detail::Clock;
  PipelineResult out;
  Report& report = out.report;
  report.config = cfg;
  report.alignment.cloud_points = bundle.cloud.size();
  report.alignment.dropped_rows = bundle.dropped_cloud_rows;

  auto start = Clock::now();
  const RigidPose depth_to_color = align_depth_to_color(bundle);
  out.sparse = project_cloud(bundle.cloud, depth_to_color, bundle.intrinsics);
  report.timings.project = detail::ms_since(start);
  report.alignment.projected = out.sparse.entries.size();
  report.alignment.dropped_behind = out.sparse.dropped_behind;
  report.alignment.dropped_outside = out.sparse.dropped_outside;

  start = Clock::now();
  out.metric = densify(out.sparse, cfg.densify);
  report.timings.densify = detail::ms_since(start);

  if (cfg.bench) {
    report.bench = detail::run_bench(out.sparse, cfg.densify, out.metric, report.timings.densify, cfg.bench_rows);
  }

  SceneResult scene = measure_scene(out.metric, bundle.detections, cfg.measure);
  report.timings.segment = scene.segment_ms;
  report.timings.measure = scene.measure_ms;
  report.objects = std::move(scene.objects);
  report.errors = std::move(scene.errors);
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization.

namespace detail {

/// Rounds to 9 significant digits; the JSON writer then prints the shortest
/// representation, which is that 9-digit decimal.
inline double sig9(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline const char* method_name(InterpMethod m) { return m == InterpMethod::Bilinear ? "bilinear" : "nn"; }

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const Report& r) {
  using nlohmann::ordered_json;
  using detail::sig9;
  ordered_json j;
  j["format_version"] = 1;
  j["measurements"] = ordered_json::array();
  for (const auto& o : r.objects) {
    const Measurement& m = o.measurement;
    ordered_json jm;
    jm["label"] = m.label;
    jm["height"] = sig9(m.height);
    jm["width"] = sig9(m.width);
    jm["mean_depth"] = sig9(m.mean_depth);
    jm["pixel_count"] = m.pixel_count;
    jm["extent_percentiles"] = {sig9(m.extent_percentiles.low), sig9(m.extent_percentiles.high)};
    jm["detection_index"] = o.detection_index ? ordered_json(*o.detection_index) : ordered_json(nullptr);
    j["measurements"].push_back(jm);
  }
  j["errors"] = ordered_json::array();
  for (const auto& e : r.errors) {
    ordered_json je;
    je["detection_index"] = e.detection_index ? ordered_json(*e.detection_index) : ordered_json(nullptr);
    je["label"] = e.label;
    je["error"] = std::string(to_string(e.code));
    je["message"] = e.message;
    j["errors"].push_back(je);
  }
  j["timings_ms"] = {{"project", sig9(r.timings.project)},
                     {"densify", sig9(r.timings.densify)},
                     {"segment", sig9(r.timings.segment)},
                     {"measure", sig9(r.timings.measure)}};
  const auto& d = r.config.densify;
  j["config"] = {
      {"interp", detail::method_name(d.method)},
      {"edge_thresh", d.edge_threshold ? ordered_json(sig9(*d.edge_threshold)) : ordered_json(nullptr)},
      {"max_radius", d.max_radius ? ordered_json(sig9(*d.max_radius)) : ordered_json(nullptr)},
      {"percentiles", {sig9(r.config.measure.percentiles.low), sig9(r.config.measure.percentiles.high)}},
  };
  j["alignment"] = {{"cloud_points", r.alignment.cloud_points},
                    {"projected", r.alignment.projected},
                    {"dropped_behind", r.alignment.dropped_behind},
                    {"dropped_outside", r.alignment.dropped_outside},
                    {"dropped_rows", r.alignment.dropped_rows}};
  if (r.bench) {
    const BenchResult& b = *r.bench;
    j["bench"] = {{"tree_ms", sig9(b.tree_ms)},
                  {"linear_scan_ms", sig9(b.linear_scan_ms)},
                  {"linear_scan_rows", b.rows},
                  {"tree_ns_per_pixel", sig9(b.tree_ns_per_pixel)},
                  {"linear_scan_ns_per_pixel", sig9(b.linear_scan_ns_per_pixel)},
                  {"speedup", sig9(b.speedup)},
                  {"outputs_agree", b.outputs_agree}};
  }
  return j;
}

}  // namespace rgbd
