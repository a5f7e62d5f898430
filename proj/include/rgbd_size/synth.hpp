// SPDX-License-Identifier: Apache-2.0
//
// Synthetic RGB-D captures with analytic ground truth: fronto-parallel boxes
// in front of a fronto-parallel background, sampled on a regular pixel grid
// the way a sparse depth sensor would be.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rgbd_size/bundle.hpp"
#include "rgbd_size/camera.hpp"
#include "rgbd_size/error.hpp"
#include "rgbd_size/image.hpp"
#include "rgbd_size/segment.hpp"

namespace rgbd::synth {

/// Axis-aligned rectangle parallel to the image plane, in the color-camera
/// frame at RGB capture time.
struct SceneObject {
  std::string label;
  double center_x = 0.0;  // meters
  double center_y = 0.0;
  double width = 0.0;
  double height = 0.0;
  double depth = 0.0;
};

/// Device motion between the depth and color captures.
struct CaptureMotion {
  std::vector<RigidPose> trajectory;
  RigidPose depth_to_color;
  double t_rgb = 0.0;
  double t_depth = 0.0;
};

/// A handheld capture: depth at 5 fps, color at 30 fps, so the depth frame is
/// taken up to ~0.2 s away from the color frame while the device drifts and
/// turns slightly. The depth sensor sits 1.2 cm beside the color camera.
inline CaptureMotion handheld_motion() {
  CaptureMotion m;
  m.trajectory = {
      RigidPose::identity(0.0),
      {0.2, Quaternion::from_axis_angle({0.3, 1.0, 0.1}, 0.8 * M_PI / 180.0), {0.021, -0.008, 0.006}},
      {0.4, Quaternion::from_axis_angle({0.1, 1.0, -0.2}, 1.5 * M_PI / 180.0), {0.035, -0.012, 0.004}},
  };
  m.depth_to_color = {Quaternion::from_axis_angle({0.0, 1.0, 0.0}, 0.4 * M_PI / 180.0), {0.012, 0.0, 0.0}};
  m.t_depth = 0.2;
  m.t_rgb = 0.1333;
  return m;
}

struct SceneSpec {
  CameraIntrinsics intrinsics;
  double background_depth = 1.3;
  std::vector<SceneObject> objects;
  int sample_stride = 10;  // pixels between depth samples
  double dropout = 0.0;    // fraction of samples removed
  double noise_sigma = 0.0;  // meters, along the viewing ray
  std::uint64_t rng_seed = 0;
  bool white_rgb = false;        // render everything white
  bool emit_detections = false;  // write one padded box per object
  double detection_padding = 0.08;  // fraction of the footprint size per side
  CaptureMotion motion = handheld_motion();

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::SpecInvalid, what); };
    try {
      intrinsics.validate();
    } catch (const Error& e) {
      fail(e.detail());
    }
    if (!(background_depth > 0.0)) fail("background_depth must be > 0");
    for (const auto& o : objects) {
      if (!(o.width > 0.0 && o.height > 0.0)) fail("object '" + o.label + "' has non-positive size");
      if (!(o.depth > 0.0 && o.depth < background_depth)) {
        fail("object '" + o.label + "' must lie between the camera and the background");
      }
    }
    if (sample_stride < 1) fail("sample_stride must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
    if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
    if (!(detection_padding >= 0.0)) fail("detection_padding must be >= 0");
    if (motion.trajectory.empty()) fail("motion trajectory is empty");
    for (std::size_t i = 1; i < motion.trajectory.size(); ++i) {
      if (!(motion.trajectory[i].timestamp() > motion.trajectory[i - 1].timestamp())) {
        fail("motion trajectory timestamps must increase");
      }
    }
  }
};

struct ObjectTruth {
  std::string label;
  double width = 0.0;
  double height = 0.0;
  double depth = 0.0;
  std::vector<std::uint8_t> footprint;  // full frame, row-major
  std::size_t footprint_count = 0;
  PixelRegion footprint_bounds;
};

struct GroundTruth {
  std::vector<ObjectTruth> objects;
  std::size_t grid_samples = 0;
  std::size_t dropped_samples = 0;
};

/// Undistorted viewing ray through a pixel, as (X/Z, Y/Z). Inverts the radial
/// polynomial numerically; exact for zero distortion.
inline std::pair<double, double> pixel_ray(const CameraIntrinsics& intr, const PixelCoord& px) {
  const double u = (px.x - intr.cx) / intr.fx;
  const double v = (px.y - intr.cy) / intr.fy;
  const double rd = std::sqrt(u * u + v * v);
  if (rd < kAxisEpsilon || (intr.k1 == 0.0 && intr.k2 == 0.0 && intr.k3 == 0.0)) return {u, v};
  double ru = rd;
  for (int i = 0; i < 100; ++i) {
    const double r2 = ru * ru;
    const double f = ru * (1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3))) - rd;
    const double df = 1.0 + r2 * (3.0 * intr.k1 + r2 * (5.0 * intr.k2 + r2 * 7.0 * intr.k3));
    const double step = f / df;
    ru -= step;
    if (std::abs(step) < 1e-16) break;
  }
  return {u * ru / rd, v * ru / rd};
}

struct RayHit {
  MetricPoint point;
  int object = -1;  // -1 for the background
};

/// First surface hit along the ray through px: the nearest object whose
/// rectangle contains the ray at its depth, otherwise the background.
inline RayHit trace(const SceneSpec& spec, const PixelCoord& px) {
  const auto [a, b] = pixel_ray(spec.intrinsics, px);
  RayHit hit{{a * spec.background_depth, b * spec.background_depth, spec.background_depth}, -1};
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    const double x = a * o.depth;
    const double y = b * o.depth;
    if (o.depth < nearest && std::abs(x - o.center_x) <= o.width / 2.0 &&
        std::abs(y - o.center_y) <= o.height / 2.0) {
      nearest = o.depth;
      hit = {{x, y, o.depth}, static_cast<int>(i)};
    }
  }
  return hit;
}

/// Pose mapping depth-sensor coordinates into the color frame for the
/// capture described by `motion`.
inline RigidPose depth_to_color_at_capture(const CaptureMotion& motion) {
  const RigidPose color_pose = interpolate_pose(motion.trajectory, motion.t_rgb);
  const RigidPose depth_pose = interpolate_pose(motion.trajectory, motion.t_depth);
  return relative_pose(color_pose, depth_pose) * motion.depth_to_color;
}

inline constexpr Rgb kBackgroundColor{96, 104, 112};
inline constexpr Rgb kObjectColors[] = {{200, 64, 48}, {48, 150, 80}, {60, 90, 200}, {210, 180, 40}, {150, 60, 170}};

struct Generated {
  FrameBundle bundle;
  GroundTruth truth;
};

inline Generated generate(const SceneSpec& spec) {
  spec.validate();
  const auto& intr = spec.intrinsics;
  const int w = intr.width;
  const int h = intr.height;

  Generated out;
  FrameBundle& bundle = out.bundle;
  GroundTruth& truth = out.truth;
  bundle.intrinsics = intr;
  bundle.trajectory = spec.motion.trajectory;
  bundle.depth_to_color = spec.motion.depth_to_color;
  bundle.t_rgb = spec.motion.t_rgb;
  bundle.t_depth = spec.motion.t_depth;

  for (const auto& o : spec.objects) {
    ObjectTruth t;
    t.label = o.label;
    t.width = o.width;
    t.height = o.height;
    t.depth = o.depth;
    t.footprint.assign(static_cast<std::size_t>(w) * h, 0);
    truth.objects.push_back(std::move(t));
  }

  bundle.rgb = Image(w, h, spec.white_rgb ? Rgb{255, 255, 255} : kBackgroundColor);
  std::vector<int> min_x(spec.objects.size(), w), min_y(spec.objects.size(), h);
  std::vector<int> max_x(spec.objects.size(), -1), max_y(spec.objects.size(), -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const RayHit hit = trace(spec, {static_cast<double>(x), static_cast<double>(y)});
      if (hit.object < 0) continue;
      const auto i = static_cast<std::size_t>(hit.object);
      auto& t = truth.objects[i];
      t.footprint[static_cast<std::size_t>(y) * w + x] = 1;
      ++t.footprint_count;
      min_x[i] = std::min(min_x[i], x);
      min_y[i] = std::min(min_y[i], y);
      max_x[i] = std::max(max_x[i], x);
      max_y[i] = std::max(max_y[i], y);
      if (!spec.white_rgb) bundle.rgb.at(x, y) = kObjectColors[i % std::size(kObjectColors)];
    }
  }
  for (std::size_t i = 0; i < truth.objects.size(); ++i) {
    if (max_x[i] >= 0) truth.objects[i].footprint_bounds = {min_x[i], min_y[i], max_x[i] - min_x[i] + 1, max_y[i] - min_y[i] + 1};
  }

  if (spec.emit_detections) {
    std::vector<DetectionBox> boxes;
    for (std::size_t i = 0; i < truth.objects.size(); ++i) {
      const PixelRegion& r = truth.objects[i].footprint_bounds;
      if (r.empty()) continue;
      const double px = spec.detection_padding * r.width;
      const double py = spec.detection_padding * r.height;
      boxes.push_back({truth.objects[i].label, 0.9, std::max(0.0, r.x0 - px), std::max(0.0, r.y0 - py),
                       std::min<double>(w, r.x0 + r.width + px), std::min<double>(h, r.y0 + r.height + py)});
    }
    bundle.detections = std::move(boxes);
  }

  // Samples are generated in the color frame and expressed in the depth
  // sensor frame, so projecting them back lands on the grid pixels.
  const RigidPose color_to_depth = depth_to_color_at_capture(spec.motion).inverse();
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int offset = spec.sample_stride / 2;
  for (int y = offset; y < h; y += spec.sample_stride) {
    for (int x = offset; x < w; x += spec.sample_stride) {
      ++truth.grid_samples;
      const double u = uniform(rng);
      const double n = normal(rng);
      if (u < spec.dropout) {
        ++truth.dropped_samples;
        continue;
      }
      MetricPoint p = trace(spec, {static_cast<double>(x), static_cast<double>(y)}).point;
      if (spec.noise_sigma > 0.0) {
        const double z = std::max(p.z + spec.noise_sigma * n, 1e-3);
        p = (z / p.z) * p;
      }
      bundle.cloud.push_back(apply_pose(color_to_depth, p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference scenes.

/// 1920x1080 color camera with a ~65 degree horizontal field of view.
inline CameraIntrinsics hd_camera() { return {1920, 1080, 1500.0, 1500.0, 960.0, 540.0, 0.0, 0.0, 0.0}; }

/// 640x480 camera for quick statistical runs.
inline CameraIntrinsics vga_camera() { return {640, 480, 525.0, 525.0, 320.0, 240.0, 0.0, 0.0, 0.0}; }

/// A 0.20 m wide, 0.30 m tall box half a meter from the camera in front of a
/// wall at 1.3 m (a desk seen from above the floor).
inline SceneSpec box_scene(CameraIntrinsics intr = hd_camera()) {
  SceneSpec s;
  s.intrinsics = intr;
  s.background_depth = 1.3;
  s.objects = {{"box", 0.013, -0.021, 0.20, 0.30, 0.5}};
  return s;
}

/// Two boxes at different depths; whole-frame clustering lumps them together.
inline SceneSpec two_box_scene(CameraIntrinsics intr = hd_camera()) {
  SceneSpec s;
  s.intrinsics = intr;
  s.background_depth = 1.6;
  s.objects = {{"crate", -0.17, 0.01, 0.22, 0.28, 0.6}, {"bin", 0.28, 0.03, 0.36, 0.42, 0.9}};
  s.emit_detections = true;
  return s;
}

}  // namespace rgbd::synth
