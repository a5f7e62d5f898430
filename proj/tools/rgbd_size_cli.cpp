// SPDX-License-Identifier: Apache-2.0
//
// rgbd-size: measure objects in a frame bundle, or generate synthetic bundles.
//
// Exit codes: 0 success, 1 bundle error, 2 bad flags.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rgbd_size/rgbd_size.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBundle = 1;
constexpr int kExitFlags = 2;

struct MeasureArgs {
  std::string bundle;
  std::string interp = "bilinear";
  double edge_thresh = 0.10;
  std::string percentiles = "0.01,0.99";
  std::string out;
  std::string overlay;
  bool bench = false;
};

struct GenerateArgs {
  std::string out;
  std::string scene = "box";
  std::uint64_t seed = 0;
  double noise = 0.0;
  double dropout = 0.0;
  std::string truth;
};

std::optional<rgbd::Percentiles> parse_percentiles(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return std::nullopt;
  rgbd::Percentiles p;
  try {
    std::size_t used = 0;
    p.low = std::stod(text.substr(0, comma), &used);
    if (used != comma) return std::nullopt;
    const std::string hi = text.substr(comma + 1);
    p.high = std::stod(hi, &used);
    if (used != hi.size()) return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!(p.low >= 0.0 && p.low <= p.high && p.high <= 1.0)) return std::nullopt;
  return p;
}

int run_measure(const MeasureArgs& args) {
  rgbd::PipelineConfig cfg;
  cfg.densify.method = args.interp == "nn" ? rgbd::InterpMethod::NearestNeighbor : rgbd::InterpMethod::Bilinear;
  if (args.edge_thresh < 0.0) {
    std::cerr << "error: --edge-thresh must be >= 0 (0 disables the gate)\n";
    return kExitFlags;
  }
  cfg.densify.edge_threshold = args.edge_thresh > 0.0 ? std::optional<double>(args.edge_thresh) : std::nullopt;
  const auto pct = parse_percentiles(args.percentiles);
  if (!pct) {
    std::cerr << "error: --percentiles expects LO,HI with 0 <= LO <= HI <= 1\n";
    return kExitFlags;
  }
  cfg.measure.percentiles = *pct;
  cfg.bench = args.bench;

  try {
    const rgbd::FrameBundle bundle = rgbd::load_bundle(args.bundle);
    for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";

    const rgbd::PipelineResult result = rgbd::run_pipeline(bundle, cfg);
    const std::string json = rgbd::report_to_json(result.report).dump(2) + "\n";
    if (args.out.empty()) {
      std::cout << json;
    } else {
      std::ofstream f(args.out, std::ios::binary);
      if (!f) throw rgbd::Error(rgbd::ErrorCode::MissingFile, "cannot write " + args.out);
      f << json;
    }
    if (!args.overlay.empty()) {
      rgbd::write_ppm(args.overlay, rgbd::render_overlay(bundle.rgb, result.report.objects, bundle.detections));
    }

    for (const auto& o : result.report.objects) {
      const auto& m = o.measurement;
      std::fprintf(stderr, "%s: height %.3f m, width %.3f m, mean depth %.3f m (%zu px)\n", m.label.c_str(), m.height,
                   m.width, m.mean_depth, m.pixel_count);
    }
    for (const auto& e : result.report.errors) {
      std::fprintf(stderr, "%s: %s (%s)\n", e.label.c_str(), std::string(rgbd::to_string(e.code)).c_str(),
                   e.message.c_str());
    }
    if (result.report.bench) {
      std::fprintf(stderr, "bench: k-d tree %.1f ns/px, linear scan %.1f ns/px, speedup %.1fx\n",
                   result.report.bench->tree_ns_per_pixel, result.report.bench->linear_scan_ns_per_pixel,
                   result.report.bench->speedup);
    }
  } catch (const rgbd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBundle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBundle;
  }
  return kExitOk;
}

int run_generate(const GenerateArgs& args) {
  namespace synth = rgbd::synth;
  synth::SceneSpec spec;
  if (args.scene == "box") {
    spec = synth::box_scene();
  } else if (args.scene == "white-box") {
    spec = synth::box_scene();
    spec.white_rgb = true;
  } else if (args.scene == "two-box") {
    spec = synth::two_box_scene();
  } else {
    spec = synth::box_scene();
    spec.objects.clear();
  }
  spec.rng_seed = args.seed;
  spec.noise_sigma = args.noise;
  spec.dropout = args.dropout;

  try {
    const auto generated = synth::generate(spec);
    rgbd::save_bundle(args.out, generated.bundle);
    if (!args.truth.empty()) {
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& o : generated.truth.objects) {
        j.push_back({{"label", o.label},
                     {"height", o.height},
                     {"width", o.width},
                     {"depth", o.depth},
                     {"footprint_pixels", o.footprint_count}});
      }
      std::ofstream f(args.truth, std::ios::binary);
      if (!f) throw rgbd::Error(rgbd::ErrorCode::MissingFile, "cannot write " + args.truth);
      f << j.dump(2) << "\n";
    }
  } catch (const rgbd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBundle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBundle;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object size estimation from RGB + sparse depth frame bundles"};
  app.require_subcommand(1);

  MeasureArgs measure;
  auto* m = app.add_subcommand("measure", "Align, densify, segment and measure one bundle");
  m->add_option("--bundle", measure.bundle, "Bundle directory")->required();
  m->add_option("--interp", measure.interp, "Densification method")
      ->check(CLI::IsMember({"nn", "bilinear"}))
      ->capture_default_str();
  m->add_option("--edge-thresh", measure.edge_thresh, "Depth-discontinuity gate for bilinear, meters (0 = off)")
      ->capture_default_str();
  m->add_option("--percentiles", measure.percentiles, "Extent percentiles LO,HI")->capture_default_str();
  m->add_option("--out", measure.out, "Report JSON path (default: stdout)");
  m->add_option("--overlay", measure.overlay, "Overlay PPM path");
  m->add_flag("--bench", measure.bench, "Also time a linear-scan densifier and report the speedup");

  GenerateArgs generate;
  auto* g = app.add_subcommand("generate", "Write a synthetic bundle with known object sizes");
  g->add_option("--out", generate.out, "Bundle directory to create")->required();
  g->add_option("--scene", generate.scene, "Preset scene")
      ->check(CLI::IsMember({"box", "white-box", "two-box", "empty"}))
      ->capture_default_str();
  g->add_option("--seed", generate.seed, "RNG seed")->capture_default_str();
  g->add_option("--noise", generate.noise, "Depth noise sigma, meters")->check(CLI::NonNegativeNumber);
  g->add_option("--dropout", generate.dropout, "Fraction of depth samples removed")->check(CLI::Range(0.0, 0.999));
  g->add_option("--truth", generate.truth, "Write ground-truth sizes as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFlags;
  }

  if (m->parsed()) return run_measure(measure);
  return run_generate(generate);
}
