// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "rgbd_size/image.hpp"
#include "rgbd_size/measure.hpp"
#include "rgbd_size/segment.hpp"

namespace rgbd {

inline constexpr Rgb kOverlayPalette[] = {{255, 0, 255}, {0, 255, 255}, {255, 255, 0},
                                          {255, 128, 0}, {0, 128, 255}, {128, 255, 0}};

inline Rgb overlay_color(std::size_t i) { return kOverlayPalette[i % std::size(kOverlayPalette)]; }

/// Half-way blend toward `tint`. A pixel that would come out unchanged is
/// nudged so that every tinted pixel differs from the input.
inline Rgb tint_pixel(Rgb p, Rgb tint) {
  Rgb out{static_cast<std::uint8_t>((p.r + tint.r + 1) / 2), static_cast<std::uint8_t>((p.g + tint.g + 1) / 2),
          static_cast<std::uint8_t>((p.b + tint.b + 1) / 2)};
  if (out == p) out.r = static_cast<std::uint8_t>(out.r ^ 0x40);
  return out;
}

/// Copy of `rgb` with each object's foreground tinted and each detection box
/// outlined (2 px) in that object's palette color. Objects from detection i
/// use palette entry i; a whole-frame object uses entry 0.
inline Image render_overlay(const Image& rgb, const std::vector<MeasuredObject>& objects,
                            const std::optional<std::vector<DetectionBox>>& detections) {
  Image out = rgb;
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const auto& obj = objects[k];
    const Rgb color = overlay_color(obj.detection_index.value_or(0));
    const PixelRegion& r = obj.mask.region;
    for (int y = r.y0; y < r.y0 + r.height; ++y) {
      for (int x = r.x0; x < r.x0 + r.width; ++x) {
        if (obj.mask.at(x, y)) out.at(x, y) = tint_pixel(rgb.at(x, y), color);
      }
    }
  }
  if (!detections) return out;
  for (std::size_t i = 0; i < detections->size(); ++i) {
    const PixelRegion r = clip_box((*detections)[i], out.width(), out.height());
    if (r.empty()) continue;
    const Rgb color = overlay_color(i);
    const int x1 = r.x0 + r.width - 1;
    const int y1 = r.y0 + r.height - 1;
    for (int t = 0; t < 2; ++t) {
      for (int x = r.x0; x <= x1; ++x) {
        out.at(x, std::min(r.y0 + t, y1)) = color;
        out.at(x, std::max(y1 - t, r.y0)) = color;
      }
      for (int y = r.y0; y <= y1; ++y) {
        out.at(std::min(r.x0 + t, x1), y) = color;
        out.at(std::max(x1 - t, r.x0), y) = color;
      }
    }
  }
  return out;
}

}  // namespace rgbd
