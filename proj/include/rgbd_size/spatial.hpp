// SPDX-License-Identifier: Apache-2.0
//
// Static 2-d tree over projected pixel positions.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rgbd_size/camera.hpp"

namespace rgbd {

struct IndexedPoint {
  PixelCoord position;
  std::size_t payload_id = 0;

  friend bool operator==(const IndexedPoint&, const IndexedPoint&) = default;
};

struct Neighbor {
  IndexedPoint point;
  double distance = 0.0;  // Euclidean, pixels

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Quadrants around a query q, half-open so each point other than q itself
/// belongs to exactly one:
///   Q0: dx > 0, dy >= 0    Q1: dx <= 0, dy > 0
///   Q2: dx < 0, dy <= 0    Q3: dx >= 0, dy < 0
/// Returns -1 for a point coinciding with q.
inline int quadrant_of(double dx, double dy) noexcept {
  if (dx > 0.0 && dy >= 0.0) return 0;
  if (dx <= 0.0 && dy > 0.0) return 1;
  if (dx < 0.0 && dy <= 0.0) return 2;
  if (dx >= 0.0 && dy < 0.0) return 3;
  return -1;
}

struct QuadrantNeighbors {
  std::array<std::optional<Neighbor>, 4> quadrant;
  std::optional<Neighbor> exact_hit;  // stored point located exactly at q

  int populated() const noexcept {
    return static_cast<int>(std::count_if(quadrant.begin(), quadrant.end(),
                                          [](const auto& n) { return n.has_value(); }));
  }

  /// Overall nearest to q among the exact hit and the four quadrant winners,
  /// ties to the lowest payload id.
  std::optional<Neighbor> nearest(const PixelCoord& q) const {
    if (exact_hit) return exact_hit;
    std::optional<Neighbor> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& n : quadrant) {
      if (!n) continue;
      const double dx = n->point.position.x - q.x;
      const double dy = n->point.position.y - q.y;
      const double d2 = dx * dx + dy * dy;
      if (!best || d2 < best_d2 || (d2 == best_d2 && n->point.payload_id < best->point.payload_id)) {
        best = n;
        best_d2 = d2;
      }
    }
    return best;
  }
};

namespace detail {

struct Candidate {
  double d2 = std::numeric_limits<double>::infinity();
  std::size_t slot = std::numeric_limits<std::size_t>::max();
  std::size_t id = std::numeric_limits<std::size_t>::max();

  bool improved_by(double other_d2, std::size_t other_id) const noexcept {
    return other_d2 < d2 || (other_d2 == d2 && other_id < id);
  }
};

struct Box {
  double x0, y0, x1, y1;
};

inline double sq(double v) noexcept { return v * v; }

// Squared distance from (qx, qy) to the box, infinite when empty.
inline double box_distance2(double qx, double qy, const Box& b) noexcept {
  if (b.x0 > b.x1 || b.y0 > b.y1) return std::numeric_limits<double>::infinity();
  const double dx = qx < b.x0 ? b.x0 - qx : (qx > b.x1 ? qx - b.x1 : 0.0);
  const double dy = qy < b.y0 ? b.y0 - qy : (qy > b.y1 ? qy - b.y1 : 0.0);
  return dx * dx + dy * dy;
}

}  // namespace detail

/// Balanced 2-d tree built by median splits on alternating axes. Nodes are
/// stored implicitly: the subtree over [lo, hi) has its splitting point at
/// (lo + hi) / 2, left subtree [lo, mid), right subtree [mid + 1, hi).
/// Ranges of at most kLeafSize points are scanned linearly.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 6;

  KdTree() = default;

  explicit KdTree(std::span<const IndexedPoint> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) return;
    bounds_ = {points_[0].position.x, points_[0].position.y, points_[0].position.x,
               points_[0].position.y};
    for (const auto& p : points_) {
      bounds_.x0 = std::min(bounds_.x0, p.position.x);
      bounds_.y0 = std::min(bounds_.y0, p.position.y);
      bounds_.x1 = std::max(bounds_.x1, p.position.x);
      bounds_.y1 = std::max(bounds_.y1, p.position.y);
    }
    build(0, points_.size(), 0);
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// Points in traversal (storage) order; identical inputs give identical order.
  std::span<const IndexedPoint> traversal() const noexcept { return points_; }

  /// Visits every stored point through the tree structure; returns the count.
  std::size_t count_reachable() const { return count(0, points_.size()); }

  std::optional<Neighbor> nearest(const PixelCoord& q) const {
    if (points_.empty()) return std::nullopt;
    detail::Candidate best;
    nearest_in(0, points_.size(), 0, q, best);
    return to_neighbor(q, best);
  }

  QuadrantNeighbors nearest_per_quadrant(const PixelCoord& q) const {
    QuadrantNeighbors out;
    if (points_.empty()) return out;
    std::array<detail::Candidate, 4> best{};
    detail::Candidate hit;
    quadrant_in(0, points_.size(), 0, bounds_, q, best, hit);
    if (hit.slot != std::numeric_limits<std::size_t>::max()) {
      out.exact_hit = Neighbor{points_[hit.slot], 0.0};
    }
    for (int k = 0; k < 4; ++k) out.quadrant[k] = to_neighbor(q, best[k]);
    return out;
  }

 private:
  static bool less_on(int axis, const IndexedPoint& a, const IndexedPoint& b) {
    const double a0 = axis == 0 ? a.position.x : a.position.y;
    const double b0 = axis == 0 ? b.position.x : b.position.y;
    if (a0 != b0) return a0 < b0;
    const double a1 = axis == 0 ? a.position.y : a.position.x;
    const double b1 = axis == 0 ? b.position.y : b.position.x;
    if (a1 != b1) return a1 < b1;
    return a.payload_id < b.payload_id;
  }

  static double coord(const IndexedPoint& p, int axis) {
    return axis == 0 ? p.position.x : p.position.y;
  }

  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= kLeafSize) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    auto cmp = [axis](const IndexedPoint& a, const IndexedPoint& b) { return less_on(axis, a, b); };
    std::nth_element(points_.begin() + lo, points_.begin() + mid, points_.begin() + hi, cmp);
    build(lo, mid, 1 - axis);
    build(mid + 1, hi, 1 - axis);
  }

  std::size_t count(std::size_t lo, std::size_t hi) const {
    if (hi - lo <= kLeafSize) return hi - lo;
    const std::size_t mid = lo + (hi - lo) / 2;
    return 1 + count(lo, mid) + count(mid + 1, hi);
  }

  std::optional<Neighbor> to_neighbor(const PixelCoord&, const detail::Candidate& c) const {
    if (c.slot == std::numeric_limits<std::size_t>::max()) return std::nullopt;
    return Neighbor{points_[c.slot], std::sqrt(c.d2)};
  }

  void consider(std::size_t slot, const PixelCoord& q, detail::Candidate& best) const {
    const IndexedPoint& p = points_[slot];
    const double d2 = detail::sq(p.position.x - q.x) + detail::sq(p.position.y - q.y);
    if (best.improved_by(d2, p.payload_id)) best = {d2, slot, p.payload_id};
  }

  void nearest_in(std::size_t lo, std::size_t hi, int axis, const PixelCoord& q,
                  detail::Candidate& best) const {
    if (hi - lo <= kLeafSize) {
      for (std::size_t i = lo; i < hi; ++i) consider(i, q, best);
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const double diff = (axis == 0 ? q.x : q.y) - coord(points_[mid], axis);
    consider(mid, q, best);
    // Points equal to the split coordinate may sit on either side, so the far
    // side is visited whenever it could hold a tie.
    if (diff < 0.0) {
      nearest_in(lo, mid, 1 - axis, q, best);
      if (diff * diff <= best.d2) nearest_in(mid + 1, hi, 1 - axis, q, best);
    } else {
      nearest_in(mid + 1, hi, 1 - axis, q, best);
      if (diff * diff <= best.d2) nearest_in(lo, mid, 1 - axis, q, best);
    }
  }

  void consider_quadrant(std::size_t slot, const PixelCoord& q,
                         std::array<detail::Candidate, 4>& best, detail::Candidate& hit) const {
    const IndexedPoint& p = points_[slot];
    const double dx = p.position.x - q.x;
    const double dy = p.position.y - q.y;
    const int k = quadrant_of(dx, dy);
    if (k < 0) {
      if (hit.improved_by(0.0, p.payload_id)) hit = {0.0, slot, p.payload_id};
      return;
    }
    const double d2 = dx * dx + dy * dy;
    if (best[k].improved_by(d2, p.payload_id)) best[k] = {d2, slot, p.payload_id};
  }

  // True when some quadrant could still gain a point (or a tie) from a box.
  static bool worth_visiting(const detail::Box& b, const PixelCoord& q,
                             const std::array<detail::Candidate, 4>& best) {
    const double inf = std::numeric_limits<double>::infinity();
    // Closed quadrant regions intersected with the box.
    const std::array<detail::Box, 4> parts = {{
        {std::max(b.x0, q.x), std::max(b.y0, q.y), b.x1, b.y1},
        {b.x0, std::max(b.y0, q.y), std::min(b.x1, q.x), b.y1},
        {b.x0, b.y0, std::min(b.x1, q.x), std::min(b.y1, q.y)},
        {std::max(b.x0, q.x), b.y0, b.x1, std::min(b.y1, q.y)},
    }};
    for (int k = 0; k < 4; ++k) {
      const double d2 = detail::box_distance2(q.x, q.y, parts[k]);
      if (d2 != inf && d2 <= best[k].d2) return true;
    }
    // A coincident point is always worth finding.
    return q.x >= b.x0 && q.x <= b.x1 && q.y >= b.y0 && q.y <= b.y1;
  }

  void quadrant_in(std::size_t lo, std::size_t hi, int axis, const detail::Box& box,
                   const PixelCoord& q, std::array<detail::Candidate, 4>& best,
                   detail::Candidate& hit) const {
    if (!worth_visiting(box, q, best)) return;
    if (hi - lo <= kLeafSize) {
      for (std::size_t i = lo; i < hi; ++i) consider_quadrant(i, q, best, hit);
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const double split = coord(points_[mid], axis);
    consider_quadrant(mid, q, best, hit);
    detail::Box left = box;
    detail::Box right = box;
    if (axis == 0) {
      left.x1 = split;
      right.x0 = split;
    } else {
      left.y1 = split;
      right.y0 = split;
    }
    if ((axis == 0 ? q.x : q.y) < split) {
      quadrant_in(lo, mid, 1 - axis, left, q, best, hit);
      quadrant_in(mid + 1, hi, 1 - axis, right, q, best, hit);
    } else {
      quadrant_in(mid + 1, hi, 1 - axis, right, q, best, hit);
      quadrant_in(lo, mid, 1 - axis, left, q, best, hit);
    }
  }

  std::vector<IndexedPoint> points_;
  detail::Box bounds_{0.0, 0.0, -1.0, -1.0};
};

/// Exhaustive scan with the same query contract as KdTree; the baseline the
/// tree is benchmarked against.
class LinearScanIndex {
 public:
  explicit LinearScanIndex(std::span<const IndexedPoint> points) : points_(points.begin(), points.end()) {}

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  std::optional<Neighbor> nearest(const PixelCoord& q) const {
    const IndexedPoint* best = nullptr;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& p : points_) {
      const double d2 = detail::sq(p.position.x - q.x) + detail::sq(p.position.y - q.y);
      if (d2 < best_d2 || (d2 == best_d2 && best && p.payload_id < best->payload_id)) {
        best = &p;
        best_d2 = d2;
      }
    }
    if (!best) return std::nullopt;
    return Neighbor{*best, std::sqrt(best_d2)};
  }

  QuadrantNeighbors nearest_per_quadrant(const PixelCoord& q) const {
    std::array<detail::Candidate, 4> best{};
    detail::Candidate hit;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      const double dx = p.position.x - q.x;
      const double dy = p.position.y - q.y;
      const int k = quadrant_of(dx, dy);
      if (k < 0) {
        if (hit.improved_by(0.0, p.payload_id)) hit = {0.0, i, p.payload_id};
        continue;
      }
      const double d2 = dx * dx + dy * dy;
      if (best[k].improved_by(d2, p.payload_id)) best[k] = {d2, i, p.payload_id};
    }
    QuadrantNeighbors out;
    if (hit.slot != std::numeric_limits<std::size_t>::max()) out.exact_hit = Neighbor{points_[hit.slot], 0.0};
    for (int k = 0; k < 4; ++k) {
      if (best[k].slot != std::numeric_limits<std::size_t>::max()) {
        out.quadrant[k] = Neighbor{points_[best[k].slot], std::sqrt(best[k].d2)};
      }
    }
    return out;
  }

 private:
  std::vector<IndexedPoint> points_;
};

}  // namespace rgbd
