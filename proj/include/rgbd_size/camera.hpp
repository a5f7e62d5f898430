// SPDX-License-Identifier: Apache-2.0
//
// Pinhole camera with three-coefficient radial distortion, rigid poses and
// the time alignment between depth and color captures.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "rgbd_size/error.hpp"

namespace rgbd {

struct MetricPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const MetricPoint&, const MetricPoint&) = default;
};

inline MetricPoint operator+(const MetricPoint& a, const MetricPoint& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline MetricPoint operator-(const MetricPoint& a, const MetricPoint& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline MetricPoint operator*(double s, const MetricPoint& p) {
  return {s * p.x, s * p.y, s * p.z};
}

/// Continuous image coordinates, x to the right and y downward. Integer
/// values address pixel centers.
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct CameraIntrinsics {
  int width = 0;
  int height = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;

  bool contains(const PixelCoord& px) const noexcept {
    return px.x >= 0.0 && px.x < width && px.y >= 0.0 && px.y < height;
  }

  /// Throws InvariantViolation naming the first offending field.
  void validate() const {
    auto fail = [](const std::string& field) {
      throw Error(ErrorCode::InvariantViolation, "intrinsics." + field);
    };
    if (width <= 0) fail("width");
    if (height <= 0) fail("height");
    if (!(fx > 0.0) || !std::isfinite(fx)) fail("fx");
    if (!(fy > 0.0) || !std::isfinite(fy)) fail("fy");
    if (!(cx >= 0.0 && cx < width)) fail("cx");
    if (!(cy >= 0.0 && cy < height)) fail("cy");
    if (!std::isfinite(k1)) fail("k1");
    if (!std::isfinite(k2)) fail("k2");
    if (!std::isfinite(k3)) fail("k3");
  }
};

struct RadialTerms {
  double ru = 0.0;  // undistorted normalized radius
  double rd = 0.0;  // distorted normalized radius
};

// Below this normalized radius the distortion factor rd/ru is taken as its
// analytic limit 1.
inline constexpr double kAxisEpsilon = 1e-12;

inline RadialTerms radial_terms(const MetricPoint& p, const CameraIntrinsics& intr) {
  if (!(p.z > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "Z = " + std::to_string(p.z));
  }
  const double ru = std::sqrt((p.x * p.x + p.y * p.y) / (p.z * p.z));
  const double ru2 = ru * ru;
  const double ru3 = ru2 * ru;
  const double ru5 = ru3 * ru2;
  const double ru7 = ru5 * ru2;
  return {ru, ru + intr.k1 * ru3 + intr.k2 * ru5 + intr.k3 * ru7};
}

inline PixelCoord project(const MetricPoint& p, const CameraIntrinsics& intr) {
  const RadialTerms r = radial_terms(p, intr);
  const double factor = r.ru < kAxisEpsilon ? 1.0 : r.rd / r.ru;
  return {p.x / p.z * intr.fx * factor + intr.cx, p.y / p.z * intr.fy * factor + intr.cy};
}

// ---------------------------------------------------------------------------
// Rotations and rigid poses.

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;

  static Quaternion identity() { return {}; }

  /// Rotation of `angle` radians about `axis` (need not be unit length).
  static Quaternion from_axis_angle(const MetricPoint& axis, double angle) {
    const double n = std::sqrt(axis.x * axis.x + axis.y * axis.y + axis.z * axis.z);
    if (n == 0.0) return identity();
    const double s = std::sin(angle / 2.0) / n;
    return Quaternion{std::cos(angle / 2.0), axis.x * s, axis.y * s, axis.z * s}.normalized();
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  /// Idempotent: a quaternion already unit to within rounding is returned
  /// bit-unchanged, so save/load cycles do not drift.
  Quaternion normalized() const {
    const double n2 = w * w + x * x + y * y + z * z;
    if (std::abs(n2 - 1.0) <= 4e-16) return *this;
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      throw Error(ErrorCode::InvariantViolation, "quaternion has zero or non-finite norm");
    }
    const double n = std::sqrt(n2);
    return {w / n, x / n, y / n, z / n};
  }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }

  friend Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }

  MetricPoint rotate(const MetricPoint& v) const {
    // v' = v + 2w (u x v) + 2 u x (u x v), u = vector part
    const double tx = 2.0 * (y * v.z - z * v.y);
    const double ty = 2.0 * (z * v.x - x * v.z);
    const double tz = 2.0 * (x * v.y - y * v.x);
    return {v.x + w * tx + (y * tz - z * ty), v.y + w * ty + (z * tx - x * tz),
            v.z + w * tz + (x * ty - y * tx)};
  }
};

/// Spherical linear interpolation along the shorter arc.
inline Quaternion slerp(const Quaternion& a, Quaternion b, double t) {
  double cos_theta = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  if (cos_theta < 0.0) {
    b = {-b.w, -b.x, -b.y, -b.z};
    cos_theta = -cos_theta;
  }
  double wa = 1.0 - t;
  double wb = t;
  if (cos_theta < 1.0 - 1e-12) {
    const double theta = std::acos(std::min(cos_theta, 1.0));
    const double sin_theta = std::sin(theta);
    wa = std::sin((1.0 - t) * theta) / sin_theta;
    wb = std::sin(t * theta) / sin_theta;
  }
  return Quaternion{wa * a.w + wb * b.w, wa * a.x + wb * b.x, wa * a.y + wb * b.y,
                    wa * a.z + wb * b.z}
      .normalized();
}

/// Maps points from a source frame into a target frame: p' = R p + t.
class RigidPose {
 public:
  RigidPose() = default;
  RigidPose(double timestamp, const Quaternion& rotation, const MetricPoint& translation)
      : timestamp_(timestamp), rotation_(rotation.normalized()), translation_(translation) {}
  RigidPose(const Quaternion& rotation, const MetricPoint& translation)
      : RigidPose(0.0, rotation, translation) {}

  static RigidPose identity(double timestamp = 0.0) { return {timestamp, {}, {}}; }

  double timestamp() const { return timestamp_; }
  const Quaternion& rotation() const { return rotation_; }
  const MetricPoint& translation() const { return translation_; }

  RigidPose with_timestamp(double t) const { return {t, rotation_, translation_}; }

  RigidPose inverse() const {
    const Quaternion inv = rotation_.conjugate();
    const MetricPoint t = inv.rotate(translation_);
    return {timestamp_, inv, {-t.x, -t.y, -t.z}};
  }

  /// (a * b) applies b first, then a.
  friend RigidPose operator*(const RigidPose& a, const RigidPose& b) {
    return {a.timestamp_, a.rotation_ * b.rotation_, a.rotation_.rotate(b.translation_) + a.translation_};
  }

  friend bool operator==(const RigidPose&, const RigidPose&) = default;

 private:
  double timestamp_ = 0.0;
  Quaternion rotation_{};
  MetricPoint translation_{};
};

inline MetricPoint apply_pose(const RigidPose& pose, const MetricPoint& p) {
  return pose.rotation().rotate(p) + pose.translation();
}

/// a^-1 * b: maps coordinates expressed in frame b into frame a, where both
/// poses map their own frame into a common (world) frame.
inline RigidPose relative_pose(const RigidPose& a, const RigidPose& b) {
  return (a.inverse() * b).with_timestamp(b.timestamp());
}

/// Pose at time t along a trajectory with strictly increasing timestamps.
/// Translation is interpolated linearly, rotation by slerp; queries outside
/// the sampled range clamp to the first or last sample.
inline RigidPose interpolate_pose(std::span<const RigidPose> trajectory, double t) {
  if (trajectory.empty()) {
    throw Error(ErrorCode::EmptyTrajectory, "cannot interpolate an empty trajectory");
  }
  if (t <= trajectory.front().timestamp()) return trajectory.front().with_timestamp(t);
  if (t >= trajectory.back().timestamp()) return trajectory.back().with_timestamp(t);

  const auto after = std::upper_bound(trajectory.begin(), trajectory.end(), t,
                                      [](double v, const RigidPose& p) { return v < p.timestamp(); });
  const RigidPose& hi = *after;
  const RigidPose& lo = *(after - 1);
  if (lo.timestamp() == t) return lo;

  const double f = (t - lo.timestamp()) / (hi.timestamp() - lo.timestamp());
  const MetricPoint& a = lo.translation();
  const MetricPoint& b = hi.translation();
  return {t, slerp(lo.rotation(), hi.rotation(), f),
          {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, a.z + (b.z - a.z) * f}};
}

}  // namespace rgbd
