// SPDX-License-Identifier: Apache-2.0
//
// Depth-only k-means segmentation into no-data / foreground / background.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgbd_size/densify.hpp"
#include "rgbd_size/error.hpp"

namespace rgbd {

struct DepthSample {
  int x = 0;
  int y = 0;
  double depth = 0.0;  // meters, 0 = no data
};

struct ClusterModel {
  int k = 0;
  std::vector<double> centers;         // ascending
  std::vector<std::uint8_t> assignment;  // per sample, index into centers
  std::vector<double> sse_history;     // within-cluster SSE after each assignment step
  int iterations = 0;

  double sse() const { return sse_history.empty() ? 0.0 : sse_history.back(); }
};

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-6;  // meters of center movement
  // Depths closer than this count as one value. Keeps rounding residue from
  // the pose round trip (~1e-15 m) from posing as a second surface.
  double resolution = 1e-9;
};

namespace detail {

// Index of the nearest center, ties to the lower index.
inline std::uint8_t nearest_center(double v, std::span<const double> centers) {
  std::uint8_t best = 0;
  double best_d = std::abs(v - centers[0]);
  for (std::size_t j = 1; j < centers.size(); ++j) {
    const double d = std::abs(v - centers[j]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint8_t>(j);
    }
  }
  return best;
}

inline std::size_t count_distinct_sorted(std::span<const double> sorted, double resolution) {
  std::size_t count = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) count += sorted[i] - sorted[i - 1] > resolution ? 1 : 0;
  return count;
}

}  // namespace detail

/// Lloyd's algorithm on scalar depths. Seeds are (0, smallest nonzero,
/// largest) for k = 3 and (smallest, largest) for k = 2. Because nearest-
/// center cells are intervals in 1-d, each iteration works on a sorted copy
/// with prefix sums; results do not depend on input order.
inline ClusterModel kmeans_depth(std::span<const double> depths, int k, const KMeansOptions& opt = {}) {
  if (k != 2 && k != 3) throw Error(ErrorCode::InvariantViolation, "k must be 2 or 3");
  std::vector<double> sorted(depths.begin(), depths.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t distinct = detail::count_distinct_sorted(sorted, opt.resolution);
  if (distinct < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::DegenerateInput,
                std::to_string(distinct) + " distinct depth values, need " + std::to_string(k));
  }
  const std::size_t n = sorted.size();
  std::vector<long double> prefix(n + 1, 0.0L);
  std::vector<long double> prefix_sq(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + sorted[i];
    prefix_sq[i + 1] = prefix_sq[i] + static_cast<long double>(sorted[i]) * sorted[i];
  }

  std::vector<double> centers;
  if (k == 3) {
    const auto first_nonzero = std::upper_bound(sorted.begin(), sorted.end(), 0.0);
    const double low = first_nonzero != sorted.end() ? *first_nonzero : sorted.back();
    centers = {0.0, low, sorted.back()};
  } else {
    centers = {sorted.front(), sorted.back()};
  }

  ClusterModel model;
  model.k = k;
  std::vector<std::size_t> bounds(static_cast<std::size_t>(k) + 1);
  auto assign = [&] {
    bounds.front() = 0;
    bounds.back() = n;
    for (int j = 0; j + 1 < k; ++j) {
      const double lo = centers[j];
      const double hi = centers[j + 1];
      // First sorted value strictly closer to the upper center.
      const auto it = std::partition_point(sorted.begin() + static_cast<std::ptrdiff_t>(bounds[j]), sorted.end(),
                                           [&](double v) { return std::abs(v - lo) <= std::abs(v - hi); });
      bounds[j + 1] = static_cast<std::size_t>(it - sorted.begin());
    }
    long double sse = 0.0L;
    for (int j = 0; j < k; ++j) {
      const std::size_t a = bounds[j];
      const std::size_t b = bounds[j + 1];
      if (a == b) continue;
      const long double c = centers[j];
      sse += (prefix_sq[b] - prefix_sq[a]) - 2.0L * c * (prefix[b] - prefix[a]) + c * c * (b - a);
    }
    model.sse_history.push_back(static_cast<double>(std::max(sse, 0.0L)));
  };

  assign();
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    double moved = 0.0;
    for (int j = 0; j < k; ++j) {
      const std::size_t a = bounds[j];
      const std::size_t b = bounds[j + 1];
      if (a == b) continue;  // empty cluster keeps its center
      const double c = static_cast<double>((prefix[b] - prefix[a]) / static_cast<long double>(b - a));
      moved = std::max(moved, std::abs(c - centers[j]));
      centers[j] = c;
    }
    ++model.iterations;
    std::sort(centers.begin(), centers.end());
    assign();
    if (moved < opt.tol) break;
  }

  for (int j = 0; j + 1 < k; ++j) {
    if (!(centers[j + 1] - centers[j] > opt.resolution)) {
      throw Error(ErrorCode::DegenerateInput, "k-means produced coincident centers");
    }
  }
  model.centers = centers;
  model.assignment.resize(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) {
    model.assignment[i] = detail::nearest_center(depths[i], centers);
  }
  return model;
}

inline ClusterModel kmeans_depth(std::span<const DepthSample> samples, int k, const KMeansOptions& opt = {}) {
  std::vector<double> depths;
  depths.reserve(samples.size());
  for (const auto& s : samples) depths.push_back(s.depth);
  return kmeans_depth(std::span<const double>(depths), k, opt);
}

/// Second-lowest center when the zero-depth cluster is present (k = 3),
/// otherwise the nearest cluster.
inline int select_foreground(const ClusterModel& model) { return model.k == 3 ? 1 : 0; }

struct DetectionBox {
  std::string label;
  double score = 1.0;
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

/// Integer pixel rectangle [x0, x0 + width) x [y0, y0 + height).
struct PixelRegion {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool empty() const noexcept { return width <= 0 || height <= 0; }
  friend bool operator==(const PixelRegion&, const PixelRegion&) = default;
};

/// Pixels covered by a box, clipped to the image. May be empty.
inline PixelRegion clip_box(const DetectionBox& box, int image_width, int image_height) {
  const double x0 = std::max(0.0, std::floor(box.x_min));
  const double y0 = std::max(0.0, std::floor(box.y_min));
  const double x1 = std::min<double>(image_width, std::ceil(box.x_max));
  const double y1 = std::min<double>(image_height, std::ceil(box.y_max));
  if (!(x1 > x0) || !(y1 > y0)) return {};
  return {static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0), static_cast<int>(y1 - y0)};
}

struct SegmentMask {
  PixelRegion region;
  std::vector<std::uint8_t> foreground;  // row-major over region
  std::size_t foreground_count = 0;

  bool at(int x, int y) const {
    return foreground[static_cast<std::size_t>(y - region.y0) * static_cast<std::size_t>(region.width) +
                      static_cast<std::size_t>(x - region.x0)] != 0;
  }
  bool contains(int x, int y) const {
    return x >= region.x0 && y >= region.y0 && x < region.x0 + region.width && y < region.y0 + region.height;
  }
};

inline SegmentMask segment_region(const MetricImage& depth, const PixelRegion& region,
                                  const KMeansOptions& opt = {}) {
  if (region.empty()) throw Error(ErrorCode::EmptyRegion, "region does not intersect the image");
  std::vector<double> depths;
  depths.reserve(static_cast<std::size_t>(region.width) * static_cast<std::size_t>(region.height));
  bool has_zero = false;
  for (int y = region.y0; y < region.y0 + region.height; ++y) {
    for (int x = region.x0; x < region.x0 + region.width; ++x) {
      const double z = depth.at(x, y).z;
      has_zero = has_zero || z == 0.0;
      depths.push_back(z);
    }
  }
  const ClusterModel model = kmeans_depth(std::span<const double>(depths), has_zero ? 3 : 2, opt);
  const auto fg = static_cast<std::uint8_t>(select_foreground(model));

  SegmentMask mask;
  mask.region = region;
  mask.foreground.resize(depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const bool on = model.assignment[i] == fg && depths[i] > 0.0;
    mask.foreground[i] = on ? 1 : 0;
    mask.foreground_count += on ? 1 : 0;
  }
  return mask;
}

/// Whole-frame clustering.
inline SegmentMask segment_frame(const MetricImage& depth, const KMeansOptions& opt = {}) {
  return segment_region(depth, {0, 0, depth.width(), depth.height()}, opt);
}

/// Clustering restricted to a detection box.
inline SegmentMask segment_bbox(const MetricImage& depth, const DetectionBox& box, const KMeansOptions& opt = {}) {
  const PixelRegion region = clip_box(box, depth.width(), depth.height());
  if (region.empty()) throw Error(ErrorCode::EmptyRegion, "box '" + box.label + "' lies outside the image");
  return segment_region(depth, region, opt);
}

}  // namespace rgbd
