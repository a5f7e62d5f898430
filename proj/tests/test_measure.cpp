// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "rgbd_size/pipeline.hpp"
#include "rgbd_size/synth.hpp"

using namespace rgbd;

namespace {

SegmentMask full_mask(int w, int h) {
  SegmentMask m;
  m.region = {0, 0, w, h};
  m.foreground.assign(static_cast<std::size_t>(w) * h, 1);
  m.foreground_count = m.foreground.size();
  return m;
}

struct RandomScene {
  MetricImage metric;
  SegmentMask mask;
};

RandomScene random_scene(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), z(0.3, 3.0);
  std::bernoulli_distribution on(0.4);
  RandomScene s{MetricImage(w, h), full_mask(w, h)};
  s.mask.foreground_count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      s.metric.at(x, y) = {u(rng), u(rng), z(rng)};
      const bool f = on(rng);
      s.mask.foreground[static_cast<std::size_t>(y) * w + x] = f;
      s.mask.foreground_count += f;
    }
  }
  return s;
}

double truth_height(const synth::GroundTruth& t, std::size_t i = 0) { return t.objects[i].height; }

}  // namespace

TEST(NearestRank, MatchesDefinition) {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i + 1;
  EXPECT_EQ(nearest_rank(v, 0.0), 1);
  EXPECT_EQ(nearest_rank(v, 0.01), 1);
  EXPECT_EQ(nearest_rank(v, 0.015), 2);
  EXPECT_EQ(nearest_rank(v, 0.5), 50);
  EXPECT_EQ(nearest_rank(v, 0.99), 99);
  EXPECT_EQ(nearest_rank(v, 1.0), 100);
  const std::vector<double> three = {1, 2, 3};
  EXPECT_EQ(nearest_rank(three, 1.0 / 3.0), 1);
  EXPECT_EQ(nearest_rank(three, 0.34), 2);
}

TEST(MeasureExtent, TwoPointSpan) {
  MetricImage img(2, 1);
  img.at(0, 0) = {0.1, 0.0, 1.0};
  img.at(1, 0) = {0.4, 1.7, 2.0};
  const auto m = measure_extent(full_mask(2, 1), img, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(m.height, 1.7);
  EXPECT_DOUBLE_EQ(m.width, 0.3);
  EXPECT_DOUBLE_EQ(m.mean_depth, 1.5);
  EXPECT_EQ(m.pixel_count, 2u);
  EXPECT_EQ(m.label, "scene-object");
}

TEST(MeasureExtent, InsufficientForeground) {
  MetricImage img(3, 1);
  img.at(1, 0) = {0, 0, 1};
  try {
    measure_extent(full_mask(3, 1), img, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientForeground);
  }
}

TEST(MeasureExtent, RejectsBadPercentiles) {
  MetricImage img(2, 1);
  img.at(0, 0) = {0, 0, 1};
  img.at(1, 0) = {1, 1, 1};
  EXPECT_THROW(measure_extent(full_mask(2, 1), img, {0.9, 0.1}), Error);
  EXPECT_THROW(measure_extent(full_mask(2, 1), img, {-0.1, 0.5}), Error);
}

TEST(MeasureExtent, WideningPercentilesNeverShrinks) {
  std::mt19937_64 rng(41);
  const auto s = random_scene(rng, 30, 20);
  double prev_h = -1, prev_w = -1;
  for (double lo : {0.3, 0.2, 0.1, 0.05, 0.01, 0.0}) {
    const auto m = measure_extent(s.mask, s.metric, {lo, 1.0 - lo});
    EXPECT_GE(m.height, prev_h);
    EXPECT_GE(m.width, prev_w);
    prev_h = m.height;
    prev_w = m.width;
  }
}

TEST(MeasureExtent, TranslationAndScaleEquivariance) {
  std::mt19937_64 rng(42);
  auto s = random_scene(rng, 25, 25);
  const Percentiles pct{0.05, 0.95};
  const auto base = measure_extent(s.mask, s.metric, pct);

  MetricImage shifted = s.metric, scaled = s.metric;
  const MetricPoint t{0.25, -0.5, 0.75};
  for (auto& p : shifted.pixels()) p = p + t;
  for (auto& p : scaled.pixels()) p = 2.5 * p;

  const auto a = measure_extent(s.mask, shifted, pct);
  EXPECT_NEAR(a.height, base.height, 1e-12);
  EXPECT_NEAR(a.width, base.width, 1e-12);
  EXPECT_NEAR(a.mean_depth, base.mean_depth + 0.75, 1e-12);
  const auto b = measure_extent(s.mask, scaled, pct);
  EXPECT_NEAR(b.height, 2.5 * base.height, 1e-12);
  EXPECT_NEAR(b.width, 2.5 * base.width, 1e-12);
  EXPECT_NEAR(b.mean_depth, 2.5 * base.mean_depth, 1e-12);
}

// ---------------------------------------------------------------------------

TEST(MeasureScene, SingleBoxWithinTwoPercent) {
  auto spec = synth::box_scene();
  const auto gen = synth::generate(spec);
  PipelineConfig cfg;
  cfg.measure.percentiles = {0.0, 1.0};
  const auto r = run_pipeline(gen.bundle, cfg);
  ASSERT_EQ(r.report.objects.size(), 1u);
  const auto& m = r.report.objects[0].measurement;
  EXPECT_FALSE(r.report.objects[0].detection_index);
  EXPECT_NEAR(m.height, 0.30, 0.02 * 0.30);
  EXPECT_NEAR(m.width, 0.20, 0.02 * 0.20);
  EXPECT_NEAR(m.mean_depth, 0.5, 1e-6);
}

TEST(MeasureScene, TwoDetectionsTwoMeasurements) {
  const auto gen = synth::generate(synth::two_box_scene());
  PipelineConfig cfg;
  cfg.measure.percentiles = {0.0, 1.0};
  const auto r = run_pipeline(gen.bundle, cfg);
  ASSERT_EQ(r.report.objects.size(), 2u);
  EXPECT_TRUE(r.report.errors.empty());
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = r.report.objects[i].measurement;
    EXPECT_EQ(r.report.objects[i].detection_index, i);
    EXPECT_EQ(m.label, gen.truth.objects[i].label);
    EXPECT_NEAR(m.height, gen.truth.objects[i].height, 0.02 * gen.truth.objects[i].height);
    EXPECT_NEAR(m.width, gen.truth.objects[i].width, 0.02 * gen.truth.objects[i].width);
  }
}

TEST(MeasureScene, OffImageBoxBecomesErrorRecord) {
  auto spec = synth::box_scene(synth::vga_camera());
  const auto gen = synth::generate(spec);
  auto r = run_pipeline(gen.bundle, PipelineConfig{});
  const std::vector<DetectionBox> boxes = {{"box", 0.9, 150, 50, 500, 450}, {"ghost", 0.5, 900, 900, 950, 950}};
  const auto scene = measure_scene(r.metric, boxes);
  ASSERT_EQ(scene.objects.size(), 1u);
  ASSERT_EQ(scene.errors.size(), 1u);
  EXPECT_EQ(scene.objects[0].detection_index, 0u);
  EXPECT_EQ(scene.errors[0].detection_index, 1u);
  EXPECT_EQ(scene.errors[0].label, "ghost");
  EXPECT_EQ(scene.errors[0].code, ErrorCode::EmptyRegion);
}

TEST(MeasureScene, FullFrameBoxMatchesWholeFrame) {
  auto spec = synth::box_scene(synth::vga_camera());
  const auto gen = synth::generate(spec);
  const auto r = run_pipeline(gen.bundle, PipelineConfig{});
  const auto frame = measure_scene(r.metric, std::nullopt);
  const auto boxed = measure_scene(r.metric, std::vector<DetectionBox>{{"scene-object", 1.0, 0, 0, 640, 480}});
  ASSERT_EQ(frame.objects.size(), 1u);
  ASSERT_EQ(boxed.objects.size(), 1u);
  const auto& a = frame.objects[0].measurement;
  const auto& b = boxed.objects[0].measurement;
  EXPECT_EQ(a.height, b.height);
  EXPECT_EQ(a.width, b.width);
  EXPECT_EQ(a.mean_depth, b.mean_depth);
  EXPECT_EQ(a.pixel_count, b.pixel_count);
}

TEST(MeasureScene, NoiseAndOutliersMonteCarlo) {
  // sigma = 4 cm along the ray plus 1% "flying pixel" outliers: depth
  // redrawn uniformly between the box and the wall along the same ray.
  int pass = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto spec = synth::box_scene(synth::vga_camera());
    spec.noise_sigma = 0.04;
    spec.rng_seed = seed;
    auto gen = synth::generate(spec);
    std::mt19937_64 rng(1000 + seed);
    std::bernoulli_distribution outlier(0.01);
    std::uniform_real_distribution<double> depth(0.5, 1.3);
    for (auto& p : gen.bundle.cloud) {
      if (outlier(rng)) p = (depth(rng) / p.z) * p;
    }
    const auto r = run_pipeline(gen.bundle, PipelineConfig{});
    if (r.report.objects.size() != 1) continue;
    const double err = std::abs(r.report.objects[0].measurement.height - truth_height(gen.truth));
    worst = std::max(worst, err);
    pass += err <= 0.05;
  }
  RecordProperty("worst_height_error_m", std::to_string(worst));
  EXPECT_GE(pass, 95) << "worst error " << worst;
}
