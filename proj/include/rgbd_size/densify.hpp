// SPDX-License-Identifier: Apache-2.0
//
// Projection of a depth-sensor point cloud into the color image and
// densification of the resulting sparse samples into a per-pixel metric image.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rgbd_size/camera.hpp"
#include "rgbd_size/error.hpp"
#include "rgbd_size/spatial.hpp"

namespace rgbd {

struct SparseEntry {
  PixelCoord pixel;
  MetricPoint point;  // color-camera frame

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

struct SparsePixelCloud {
  CameraIntrinsics intrinsics;
  std::vector<SparseEntry> entries;
  std::size_t dropped_behind = 0;   // Z <= 0 after alignment
  std::size_t dropped_outside = 0;  // projected outside the image
};

/// Dense per-pixel (X, Y, Z); (0, 0, 0) marks "no data".
class MetricImage {
 public:
  MetricImage() = default;
  MetricImage(int width, int height)
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  const MetricPoint& at(int x, int y) const { return data_[index(x, y)]; }
  MetricPoint& at(int x, int y) { return data_[index(x, y)]; }
  bool has_data(int x, int y) const { return at(x, y).z > 0.0; }

  std::span<const MetricPoint> pixels() const noexcept { return data_; }
  std::span<MetricPoint> pixels() noexcept { return data_; }

  friend bool operator==(const MetricImage&, const MetricImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<MetricPoint> data_;
};

enum class InterpMethod { NearestNeighbor, Bilinear };

struct DensifyConfig {
  InterpMethod method = InterpMethod::Bilinear;
  std::optional<double> edge_threshold;  // meters
  std::optional<double> max_radius;      // pixels
  unsigned threads = 1;                  // 0 selects hardware concurrency

  void validate() const {
    if (edge_threshold && !(*edge_threshold > 0.0)) {
      throw Error(ErrorCode::InvariantViolation, "densify.edge_threshold must be > 0");
    }
    if (max_radius && !(*max_radius > 0.0)) {
      throw Error(ErrorCode::InvariantViolation, "densify.max_radius must be > 0");
    }
  }
};

/// Transforms each depth-frame point into the color frame, projects it and
/// keeps it iff Z > 0 and the pixel lies inside the image. Input order is
/// preserved.
inline SparsePixelCloud project_cloud(std::span<const MetricPoint> cloud, const RigidPose& depth_to_color,
                                      const CameraIntrinsics& intr) {
  intr.validate();
  SparsePixelCloud out;
  out.intrinsics = intr;
  out.entries.reserve(cloud.size());
  for (const auto& p : cloud) {
    const MetricPoint c = apply_pose(depth_to_color, p);
    if (!(c.z > 0.0)) {
      ++out.dropped_behind;
      continue;
    }
    const PixelCoord px = project(c, intr);
    if (!intr.contains(px)) {
      ++out.dropped_outside;
      continue;
    }
    out.entries.push_back({px, c});
  }
  return out;
}

/// Index points for the sparse cloud. When several entries fall on the same
/// (rounded) pixel only the closest surface is kept; payload ids are the
/// entry positions in `sparse.entries`.
inline std::vector<IndexedPoint> resolve_occlusions(const SparsePixelCloud& sparse) {
  std::unordered_map<std::int64_t, std::size_t> owner;
  owner.reserve(sparse.entries.size());
  const std::int64_t stride = static_cast<std::int64_t>(sparse.intrinsics.width) + 2;
  for (std::size_t i = 0; i < sparse.entries.size(); ++i) {
    const auto& e = sparse.entries[i];
    const auto key = static_cast<std::int64_t>(std::floor(e.pixel.y + 0.5)) * stride +
                     static_cast<std::int64_t>(std::floor(e.pixel.x + 0.5));
    auto [it, inserted] = owner.try_emplace(key, i);
    if (!inserted && e.point.z < sparse.entries[it->second].point.z) it->second = i;
  }
  std::vector<std::size_t> kept;
  kept.reserve(owner.size());
  for (const auto& [key, idx] : owner) kept.push_back(idx);
  std::sort(kept.begin(), kept.end());

  std::vector<IndexedPoint> points;
  points.reserve(kept.size());
  for (std::size_t idx : kept) points.push_back({sparse.entries[idx].pixel, idx});
  return points;
}

// ---------------------------------------------------------------------------
// Four-quadrant interpolation.

struct StencilCorner {
  PixelCoord pixel;
  MetricPoint value;
};

/// Intermediate quantities of the two-stage interpolation. p0/p1 are the
/// corners on the dy > 0 side of the query (left, right), p3/p2 the corners
/// on the dy < 0 side (left, right). m lies on segment p0-p1 and n on segment
/// p3-p2, both at the query column.
struct BilinearStencil {
  std::array<StencilCorner, 4> p;
  PixelCoord m;
  PixelCoord n;
  double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double d_m = 0.0, d_n = 0.0;
  MetricPoint value_m;
  MetricPoint value_n;
  MetricPoint result;
};

inline constexpr double kCollinearEpsilon = 1e-9;

namespace detail {

inline double distance(const PixelCoord& a, const PixelCoord& b) {
  return std::sqrt(sq(a.x - b.x) + sq(a.y - b.y));
}

// Weighted pair: the weight of each end is the distance to the other one.
// When both distances vanish (the query sits on m and n at once) the two
// ends are equally valid and the midpoint is returned.
inline MetricPoint blend(const MetricPoint& a, double da, const MetricPoint& b, double db) {
  const double s = da + db;
  if (s == 0.0) return 0.5 * (a + b);
  return {(db * a.x + da * b.x) / s, (db * a.y + da * b.y) / s, (db * a.z + da * b.z) / s};
}

}  // namespace detail

/// Evaluates the interpolation at q. Returns nullopt when a corner pair is
/// (numerically) vertical, where the segment slope is undefined.
inline std::optional<BilinearStencil> bilinear_stencil(const PixelCoord& q,
                                                       const std::array<StencilCorner, 4>& corners) {
  const auto& [p0, p1, p2, p3] = corners;
  if (std::abs(p1.pixel.x - p0.pixel.x) < kCollinearEpsilon ||
      std::abs(p2.pixel.x - p3.pixel.x) < kCollinearEpsilon) {
    return std::nullopt;
  }
  BilinearStencil s;
  s.p = corners;
  s.m = {q.x, p0.pixel.y + (q.x - p0.pixel.x) * (p1.pixel.y - p0.pixel.y) / (p1.pixel.x - p0.pixel.x)};
  s.n = {q.x, p3.pixel.y + (q.x - p3.pixel.x) * (p2.pixel.y - p3.pixel.y) / (p2.pixel.x - p3.pixel.x)};
  s.d0 = detail::distance(s.m, p0.pixel);
  s.d1 = detail::distance(s.m, p1.pixel);
  s.d2 = detail::distance(s.n, p2.pixel);
  s.d3 = detail::distance(s.n, p3.pixel);
  s.value_m = detail::blend(p0.value, s.d0, p1.value, s.d1);
  s.value_n = detail::blend(p3.value, s.d3, p2.value, s.d2);
  s.d_m = detail::distance(q, s.m);
  s.d_n = detail::distance(q, s.n);
  // X = (d_m X_n + d_n X_m) / (d_m + d_n)
  s.result = detail::blend(s.value_m, s.d_m, s.value_n, s.d_n);
  return s;
}

/// Inverse-distance weighting, used when the stencil is degenerate.
inline MetricPoint inverse_distance_weight(const PixelCoord& q, std::span<const StencilCorner> corners) {
  double wsum = 0.0;
  MetricPoint acc;
  for (const auto& c : corners) {
    const double w = 1.0 / detail::distance(q, c.pixel);
    wsum += w;
    acc = acc + w * c.value;
  }
  return (1.0 / wsum) * acc;
}

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Quadrant index feeding each stencil corner p0..p3.
inline constexpr std::array<int, 4> kCornerQuadrant = {1, 0, 3, 2};

template <class Index>
MetricPoint nearest_value(const Index& index, const SparsePixelCloud& sparse, const PixelCoord& q,
                          const DensifyConfig& cfg) {
  const auto nn = index.nearest(q);
  if (!nn || (cfg.max_radius && nn->distance > *cfg.max_radius)) return {};
  return sparse.entries[nn->point.payload_id].point;
}

template <class Index>
MetricPoint bilinear_value(const Index& index, const SparsePixelCloud& sparse, const PixelCoord& q,
                           const DensifyConfig& cfg) {
  const QuadrantNeighbors qn = index.nearest_per_quadrant(q);
  if (qn.exact_hit) return sparse.entries[qn.exact_hit->point.payload_id].point;

  const auto nearest = qn.nearest(q);
  if (!nearest || (cfg.max_radius && nearest->distance > *cfg.max_radius)) return {};
  const MetricPoint& fallback = sparse.entries[nearest->point.payload_id].point;
  if (qn.populated() < 4) return fallback;

  std::array<StencilCorner, 4> corners;
  for (int c = 0; c < 4; ++c) {
    const Neighbor& nb = *qn.quadrant[kCornerQuadrant[c]];
    corners[c] = {nb.point.position, sparse.entries[nb.point.payload_id].point};
  }
  if (cfg.edge_threshold) {
    const double med = median({corners[0].value.z, corners[1].value.z, corners[2].value.z, corners[3].value.z});
    for (const auto& c : corners) {
      if (std::abs(c.value.z - med) > *cfg.edge_threshold) return fallback;
    }
  }
  if (auto s = bilinear_stencil(q, corners)) return s->result;
  return inverse_distance_weight(q, corners);
}

template <class Index>
void fill_rows(const Index& index, const SparsePixelCloud& sparse, const DensifyConfig& cfg,
               MetricImage& out, std::span<const int> rows) {
  const bool bilinear = cfg.method == InterpMethod::Bilinear;
  for (int y : rows) {
    for (int x = 0; x < out.width(); ++x) {
      const PixelCoord q{static_cast<double>(x), static_cast<double>(y)};
      out.at(x, y) = bilinear ? bilinear_value(index, sparse, q, cfg) : nearest_value(index, sparse, q, cfg);
    }
  }
}

}  // namespace detail

/// Densifies the given rows (all rows when `rows` is empty) using any index
/// that offers nearest() and nearest_per_quadrant(). Rows not listed stay
/// "no data". Output is independent of the thread count.
template <class Index>
MetricImage densify_with(const Index& index, const SparsePixelCloud& sparse, const DensifyConfig& cfg,
                         std::span<const int> rows = {}) {
  cfg.validate();
  const auto& intr = sparse.intrinsics;
  MetricImage out(intr.width, intr.height);
  std::vector<int> all_rows;
  if (rows.empty()) {
    all_rows.resize(static_cast<std::size_t>(intr.height));
    for (int y = 0; y < intr.height; ++y) all_rows[static_cast<std::size_t>(y)] = y;
    rows = all_rows;
  }
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(rows.size()));
  if (threads <= 1) {
    detail::fill_rows(index, sparse, cfg, out, rows);
    return out;
  }
  // Disjoint row blocks; each pixel is written by exactly one thread.
  std::vector<std::jthread> pool;
  const std::size_t block = (rows.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < rows.size(); begin += block) {
    const auto part = rows.subspan(begin, std::min(block, rows.size() - begin));
    pool.emplace_back([&, part] { detail::fill_rows(index, sparse, cfg, out, part); });
  }
  return out;
}

namespace detail {

inline void require_nonempty(const SparsePixelCloud& sparse) {
  if (sparse.entries.empty()) throw Error(ErrorCode::EmptySparseCloud, "no projected depth samples");
}

inline void require_method(const DensifyConfig& cfg, InterpMethod m) {
  if (cfg.method != m) throw Error(ErrorCode::InvariantViolation, "densify.method does not match the call");
}

}  // namespace detail

inline MetricImage densify_nearest(const SparsePixelCloud& sparse, const DensifyConfig& cfg) {
  detail::require_method(cfg, InterpMethod::NearestNeighbor);
  detail::require_nonempty(sparse);
  const auto points = resolve_occlusions(sparse);
  return densify_with(KdTree(points), sparse, cfg);
}

inline MetricImage densify_bilinear(const SparsePixelCloud& sparse, const DensifyConfig& cfg) {
  detail::require_method(cfg, InterpMethod::Bilinear);
  detail::require_nonempty(sparse);
  const auto points = resolve_occlusions(sparse);
  return densify_with(KdTree(points), sparse, cfg);
}

inline MetricImage densify(const SparsePixelCloud& sparse, const DensifyConfig& cfg) {
  return cfg.method == InterpMethod::Bilinear ? densify_bilinear(sparse, cfg) : densify_nearest(sparse, cfg);
}

}  // namespace rgbd
