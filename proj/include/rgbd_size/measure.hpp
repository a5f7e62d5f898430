// SPDX-License-Identifier: Apache-2.0
//
// Metric extents of a segmented pixel set.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rgbd_size/densify.hpp"
#include "rgbd_size/error.hpp"
#include "rgbd_size/segment.hpp"

namespace rgbd {

struct Percentiles {
  double low = 0.01;
  double high = 0.99;

  friend bool operator==(const Percentiles&, const Percentiles&) = default;
};

struct Measurement {
  std::string label;
  double height = 0.0;      // span of Y, meters
  double width = 0.0;       // span of X, meters
  double mean_depth = 0.0;  // mean Z, meters
  std::size_t pixel_count = 0;
  Percentiles extent_percentiles;
};

/// Nearest-rank percentile of an ascending list: the value at rank
/// ceil(p * n), with p = 0 giving the minimum.
inline double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  // The 1e-9 slack keeps p * n from rounding up past an exact rank.
  const double rank = std::ceil(p * n - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(rank - 1.0, 0.0, n - 1.0));
  return sorted[idx];
}

inline Measurement measure_extent(const SegmentMask& mask, const MetricImage& metric, const Percentiles& pct,
                                  std::string label = "scene-object") {
  if (!(pct.low >= 0.0 && pct.low <= pct.high && pct.high <= 1.0)) {
    throw Error(ErrorCode::InvariantViolation, "percentiles must satisfy 0 <= low <= high <= 1");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  long double depth_sum = 0.0L;
  const PixelRegion& r = mask.region;
  for (int y = r.y0; y < r.y0 + r.height; ++y) {
    for (int x = r.x0; x < r.x0 + r.width; ++x) {
      if (!mask.at(x, y)) continue;
      const MetricPoint& p = metric.at(x, y);
      if (!(p.z > 0.0)) continue;
      xs.push_back(p.x);
      ys.push_back(p.y);
      depth_sum += p.z;
    }
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::InsufficientForeground,
                std::to_string(xs.size()) + " foreground pixel(s) with metric data, need 2");
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  Measurement m;
  m.label = std::move(label);
  m.height = nearest_rank(ys, pct.high) - nearest_rank(ys, pct.low);
  m.width = nearest_rank(xs, pct.high) - nearest_rank(xs, pct.low);
  m.mean_depth = static_cast<double>(depth_sum / static_cast<long double>(xs.size()));
  m.pixel_count = xs.size();
  m.extent_percentiles = pct;
  return m;
}

struct ObjectError {
  std::optional<std::size_t> detection_index;
  std::string label;
  ErrorCode code = ErrorCode::DegenerateInput;
  std::string message;
};

struct MeasuredObject {
  std::optional<std::size_t> detection_index;  // absent for whole-frame segmentation
  Measurement measurement;
  SegmentMask mask;
};

struct SceneResult {
  std::vector<MeasuredObject> objects;
  std::vector<ObjectError> errors;
  double segment_ms = 0.0;
  double measure_ms = 0.0;
};

struct MeasureConfig {
  Percentiles percentiles;
  KMeansOptions kmeans;
};

/// Segments the object(s) and measures the resulting masks. Without detections
/// the whole frame is clustered; with detections each box is clustered on its
/// own. Failures are recorded per object and never abort the scene.
inline SceneResult measure_scene(const MetricImage& metric, const std::optional<std::vector<DetectionBox>>& detections,
                                 const MeasureConfig& cfg = {}) {
  SceneResult out;
  auto run = [&](std::optional<std::size_t> index, const std::string& label, auto&& segment) {
    using Clock = std::chrono::steady_clock;
    auto elapsed_ms = [](Clock::time_point since) {
      return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
    };
    try {
      auto start = Clock::now();
      SegmentMask mask = segment();
      out.segment_ms += elapsed_ms(start);
      start = Clock::now();
      Measurement m = measure_extent(mask, metric, cfg.percentiles, label);
      out.measure_ms += elapsed_ms(start);
      out.objects.push_back({index, std::move(m), std::move(mask)});
    } catch (const Error& e) {
      out.errors.push_back({index, label, e.code(), e.detail()});
    }
  };
  if (!detections) {
    run(std::nullopt, "scene-object", [&] { return segment_frame(metric, cfg.kmeans); });
    return out;
  }
  for (std::size_t i = 0; i < detections->size(); ++i) {
    const DetectionBox& box = (*detections)[i];
    run(i, box.label, [&] { return segment_bbox(metric, box, cfg.kmeans); });
  }
  return out;
}

}  // namespace rgbd
