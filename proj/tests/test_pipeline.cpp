// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "rgbd_size/overlay.hpp"
#include "rgbd_size/pipeline.hpp"
#include "rgbd_size/synth.hpp"

using namespace rgbd;

namespace {

PipelineConfig config(InterpMethod m, Percentiles pct = {0.0, 1.0}) {
  PipelineConfig c;
  c.densify.method = m;
  c.measure.percentiles = pct;
  return c;
}

int significant_digits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) return p;
  }
  return 17;
}

}  // namespace

TEST(Align, ComposesInterpolatedPosesAndExtrinsic) {
  const auto g = synth::generate(synth::box_scene(synth::vga_camera()));
  const auto& b = g.bundle;
  const RigidPose t = align_depth_to_color(b);
  // Independent route: world <- depth sensor, then color <- world.
  const RigidPose w_color = interpolate_pose(b.trajectory, b.t_rgb);
  const RigidPose w_depth = interpolate_pose(b.trajectory, b.t_depth);
  for (const MetricPoint p : {MetricPoint{0.1, 0.2, 1.0}, MetricPoint{-0.4, 0.05, 0.6}}) {
    const MetricPoint in_world = apply_pose(w_depth, apply_pose(b.depth_to_color, p));
    const MetricPoint want = apply_pose(w_color.inverse(), in_world);
    const MetricPoint got = apply_pose(t, p);
    EXPECT_NEAR(got.x, want.x, 1e-12);
    EXPECT_NEAR(got.y, want.y, 1e-12);
    EXPECT_NEAR(got.z, want.z, 1e-12);
  }
  // The handheld motion is not negligible: ignoring it shifts the cloud.
  const MetricPoint naive = apply_pose(b.depth_to_color, {0, 0, 1});
  EXPECT_GT(std::abs(apply_pose(t, {0, 0, 1}).x - naive.x), 5e-3);
}

TEST(Pipeline, NoiseFreeBoxBothMethods) {
  const auto g = synth::generate(synth::box_scene());
  for (auto m : {InterpMethod::NearestNeighbor, InterpMethod::Bilinear}) {
    const auto r = run_pipeline(g.bundle, config(m));
    ASSERT_EQ(r.report.objects.size(), 1u);
    const auto& meas = r.report.objects[0].measurement;
    EXPECT_NEAR(meas.height, 0.30, 0.006);
    EXPECT_NEAR(meas.width, 0.20, 0.004);
    EXPECT_EQ(r.report.alignment.projected, g.bundle.cloud.size());
    EXPECT_GE(r.report.timings.project, 0.0);
    EXPECT_GE(r.report.timings.densify, 0.0);
  }
}

TEST(Pipeline, BilinearBeatsNearestInsideTheObject) {
  // Off-grid pixels inside the box: the interpolated (X, Y) follows the
  // pixel's own ray, the nearest sample's does not.
  const auto spec = synth::box_scene(synth::vga_camera());
  const auto g = synth::generate(spec);
  const auto nn = run_pipeline(g.bundle, config(InterpMethod::NearestNeighbor));
  const auto bl = run_pipeline(g.bundle, config(InterpMethod::Bilinear));
  const auto& b = g.truth.objects[0].footprint_bounds;
  double err_nn = 0, err_bl = 0;
  int n = 0;
  for (int y = b.y0 + 15; y < b.y0 + b.height - 15; y += 3) {
    for (int x = b.x0 + 15; x < b.x0 + b.width - 15; x += 3) {
      const MetricPoint t = synth::trace(spec, {double(x), double(y)}).point;
      const auto e = [&](const MetricPoint& p) { return std::hypot(p.x - t.x, p.y - t.y, p.z - t.z); };
      const double a = e(nn.metric.at(x, y)), c = e(bl.metric.at(x, y));
      EXPECT_LE(c, a + 1e-12) << x << "," << y;
      err_nn += a;
      err_bl += c;
      ++n;
    }
  }
  EXPECT_GT(n, 1000);
  EXPECT_LT(err_bl / n, 1e-9);
  EXPECT_GT(err_nn / n, 1e-3);
}

TEST(Pipeline, PerDetectionMeasuresEachObject) {
  const auto g = synth::generate(synth::two_box_scene());
  const auto r = run_pipeline(g.bundle, config(InterpMethod::Bilinear));
  ASSERT_EQ(r.report.objects.size() + r.report.errors.size(), g.bundle.detections->size());
  ASSERT_EQ(r.report.objects.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = r.report.objects[i].measurement;
    const auto& t = g.truth.objects[i];
    EXPECT_LE(std::abs(m.height - t.height), 0.02 * t.height) << t.label;
    EXPECT_LE(std::abs(m.width - t.width), 0.02 * t.width) << t.label;
    EXPECT_NEAR(m.mean_depth, t.depth, 1e-6);
  }
}

TEST(Pipeline, WholeFrameLumpsTheTwoObjects) {
  auto g = synth::generate(synth::two_box_scene());
  g.bundle.detections.reset();
  const auto r = run_pipeline(g.bundle, config(InterpMethod::Bilinear));
  ASSERT_EQ(r.report.objects.size(), 1u);
  // Both boxes land in the near cluster, so the extent spans them both.
  EXPECT_GT(r.report.objects[0].measurement.width, g.truth.objects[0].width + g.truth.objects[1].width);
}

TEST(Pipeline, NothingProjectsIsABundleError) {
  auto g = synth::generate(synth::box_scene(synth::vga_camera()));
  for (auto& p : g.bundle.cloud) p.z = -p.z;
  try {
    run_pipeline(g.bundle, PipelineConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySparseCloud);
  }
}

TEST(Pipeline, BenchAgreesWithTree) {
  const auto g = synth::generate(synth::box_scene(synth::vga_camera()));
  auto cfg = PipelineConfig{};
  cfg.bench = true;
  cfg.bench_rows = 6;
  const auto r = run_pipeline(g.bundle, cfg);
  ASSERT_TRUE(r.report.bench);
  EXPECT_TRUE(r.report.bench->outputs_agree);
  EXPECT_EQ(r.report.bench->rows, 6);
  EXPECT_GT(r.report.bench->speedup, 1.0);
}

// ---------------------------------------------------------------------------

TEST(Report, JsonLayout) {
  auto g = synth::generate(synth::two_box_scene(synth::vga_camera()));
  g.bundle.detections->push_back({"ghost", 0.3, 900, 900, 950, 950});
  const auto r = run_pipeline(g.bundle, PipelineConfig{});
  const auto j = report_to_json(r.report);
  EXPECT_EQ(j.at("format_version"), 1);
  ASSERT_EQ(j.at("measurements").size(), 2u);
  const auto& m = j.at("measurements")[0];
  std::vector<std::string> keys;
  for (auto it = m.begin(); it != m.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"label", "height", "width", "mean_depth", "pixel_count",
                                            "extent_percentiles", "detection_index"}));
  EXPECT_EQ(m.at("label"), "crate");
  EXPECT_EQ(m.at("detection_index"), 0);
  EXPECT_EQ(m.at("extent_percentiles"), nlohmann::ordered_json::array({0.01, 0.99}));
  ASSERT_EQ(j.at("errors").size(), 1u);
  EXPECT_EQ(j.at("errors")[0].at("error"), "EmptyRegion");
  EXPECT_EQ(j.at("errors")[0].at("detection_index"), 2);
  for (const char* k : {"project", "densify", "segment", "measure"}) EXPECT_GE(j.at("timings_ms").at(k).get<double>(), 0.0);
  EXPECT_EQ(j.at("config").at("interp"), "bilinear");
  EXPECT_EQ(j.at("config").at("edge_thresh"), 0.1);
  EXPECT_TRUE(j.at("config").at("max_radius").is_null());
  EXPECT_FALSE(j.contains("bench"));
}

TEST(Report, FloatsCarryAtMostNineSignificantDigits) {
  const auto g = synth::generate(synth::box_scene(synth::vga_camera()));
  auto g2 = g;
  g2.bundle.detections.reset();
  const auto j = report_to_json(run_pipeline(g2.bundle, PipelineConfig{}).report);
  const auto& m = j.at("measurements")[0];
  EXPECT_TRUE(m.at("detection_index").is_null());
  for (const char* k : {"height", "width", "mean_depth"}) {
    const double v = m.at(k).get<double>();
    EXPECT_LE(significant_digits(v), 9) << k << " = " << v;
  }
  EXPECT_EQ(detail::sig9(0.123456789123), 0.123456789);
  EXPECT_EQ(detail::sig9(1234.56789012), 1234.56789);
}

// ---------------------------------------------------------------------------

TEST(Overlay, EmptyReportCopiesImage) {
  const auto g = synth::generate(synth::box_scene(synth::vga_camera()));
  EXPECT_EQ(render_overlay(g.bundle.rgb, {}, std::nullopt), g.bundle.rgb);
}

TEST(Overlay, FullFrameMaskTintsEveryPixel) {
  Image rgb(16, 8, {10, 200, 30});
  rgb.at(3, 3) = {255, 0, 255};  // already the tint color
  MeasuredObject obj;
  obj.mask.region = {0, 0, 16, 8};
  obj.mask.foreground.assign(128, 1);
  obj.mask.foreground_count = 128;
  const Image out = render_overlay(rgb, {obj}, std::nullopt);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 16; ++x) EXPECT_NE(out.at(x, y), rgb.at(x, y)) << x << "," << y;
}

TEST(Overlay, TintedPixelsEqualMask) {
  const auto spec = synth::box_scene(synth::vga_camera());
  const auto g = synth::generate(spec);
  const auto r = run_pipeline(g.bundle, PipelineConfig{});
  ASSERT_EQ(r.report.objects.size(), 1u);
  const auto& mask = r.report.objects[0].mask;
  const Image out = render_overlay(g.bundle.rgb, r.report.objects, std::nullopt);
  std::size_t changed = 0;
  for (int y = 0; y < 480; ++y) {
    for (int x = 0; x < 640; ++x) {
      const bool tinted = out.at(x, y) != g.bundle.rgb.at(x, y);
      ASSERT_EQ(tinted, mask.at(x, y)) << x << "," << y;
      changed += tinted;
    }
  }
  EXPECT_EQ(changed, mask.foreground_count);
}

TEST(Overlay, DetectionOutlinesUsePerObjectColors) {
  const auto g = synth::generate(synth::two_box_scene(synth::vga_camera()));
  const auto r = run_pipeline(g.bundle, PipelineConfig{});
  const Image out = render_overlay(g.bundle.rgb, r.report.objects, g.bundle.detections);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto region = clip_box((*g.bundle.detections)[i], 640, 480);
    EXPECT_EQ(out.at(region.x0, region.y0), overlay_color(i));
    EXPECT_EQ(out.at(region.x0 + 1, region.y0 + region.height - 2), overlay_color(i));
  }
  EXPECT_NE(overlay_color(0), overlay_color(1));
}
