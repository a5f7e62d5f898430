// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations used only by the tests. Nothing here
// calls into the library's search or interpolation code.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

struct Pt {
  double x, y;
  std::size_t id;
};

struct Hit {
  std::size_t id;
  double d2;
};

inline std::optional<Hit> nearest(const std::vector<Pt>& pts, double qx, double qy) {
  std::optional<Hit> best;
  for (const auto& p : pts) {
    const double d2 = (p.x - qx) * (p.x - qx) + (p.y - qy) * (p.y - qy);
    if (!best || d2 < best->d2 || (d2 == best->d2 && p.id < best->id)) best = Hit{p.id, d2};
  }
  return best;
}

struct Quadrants {
  std::array<std::optional<Hit>, 4> q;
  std::optional<std::size_t> exact;
};

// Q0: dx>0,dy>=0  Q1: dx<=0,dy>0  Q2: dx<0,dy<=0  Q3: dx>=0,dy<0
inline Quadrants quadrants(const std::vector<Pt>& pts, double qx, double qy) {
  Quadrants out;
  for (const auto& p : pts) {
    const double dx = p.x - qx;
    const double dy = p.y - qy;
    int k;
    if (dx == 0.0 && dy == 0.0) {
      if (!out.exact || p.id < *out.exact) out.exact = p.id;
      continue;
    } else if (dx > 0 && dy >= 0) {
      k = 0;
    } else if (dx <= 0 && dy > 0) {
      k = 1;
    } else if (dx < 0 && dy <= 0) {
      k = 2;
    } else {
      k = 3;
    }
    const double d2 = dx * dx + dy * dy;
    auto& b = out.q[static_cast<std::size_t>(k)];
    if (!b || d2 < b->d2 || (d2 == b->d2 && p.id < b->id)) b = Hit{p.id, d2};
  }
  return out;
}

struct Sample {
  double px, py;     // pixel position
  double X, Y, Z;    // metric value
};

struct Vec3 {
  double X = 0, Y = 0, Z = 0;
};

/// Direct transcription of the four-quadrant interpolation, evaluated over
/// a plain sample list. `edge` <= 0 disables the depth gate; `radius` <= 0
/// disables the fill radius.
inline Vec3 bilinear_pixel(const std::vector<Sample>& s, double x, double y, double edge = 0.0,
                           double radius = 0.0) {
  std::vector<Pt> pts;
  for (std::size_t i = 0; i < s.size(); ++i) pts.push_back({s[i].px, s[i].py, i});
  const Quadrants qd = quadrants(pts, x, y);
  auto val = [&](std::size_t i) { return Vec3{s[i].X, s[i].Y, s[i].Z}; };
  if (qd.exact) return val(*qd.exact);
  const auto nn = nearest(pts, x, y);
  if (!nn) return {};
  if (radius > 0 && std::sqrt(nn->d2) > radius) return {};
  for (const auto& q : qd.q) {
    if (!q) return val(nn->id);
  }
  // p0: dy>0 left (Q1), p1: dy>=0 right (Q0), p2: dy<0 right (Q3), p3: dy<=0 left (Q2)
  const std::size_t i0 = qd.q[1]->id, i1 = qd.q[0]->id, i2 = qd.q[3]->id, i3 = qd.q[2]->id;
  if (edge > 0) {
    double z[4] = {s[i0].Z, s[i1].Z, s[i2].Z, s[i3].Z};
    std::sort(z, z + 4);
    const double med = 0.5 * (z[1] + z[2]);
    for (std::size_t i : {i0, i1, i2, i3}) {
      if (std::abs(s[i].Z - med) > edge) return val(nn->id);
    }
  }
  const double x0 = s[i0].px, y0 = s[i0].py, x1 = s[i1].px, y1 = s[i1].py;
  const double x2 = s[i2].px, y2 = s[i2].py, x3 = s[i3].px, y3 = s[i3].py;
  if (std::abs(x1 - x0) < 1e-9 || std::abs(x2 - x3) < 1e-9) {
    double w = 0;
    Vec3 acc;
    for (std::size_t i : {i0, i1, i2, i3}) {
      const double wi = 1.0 / std::hypot(s[i].px - x, s[i].py - y);
      w += wi;
      acc.X += wi * s[i].X;
      acc.Y += wi * s[i].Y;
      acc.Z += wi * s[i].Z;
    }
    return {acc.X / w, acc.Y / w, acc.Z / w};
  }
  const double xm = x, ym = y0 + (x - x0) * (y1 - y0) / (x1 - x0);
  const double xn = x, yn = y3 + (x - x3) * (y2 - y3) / (x2 - x3);
  const double d0 = std::sqrt((xm - x0) * (xm - x0) + (ym - y0) * (ym - y0));
  const double d1 = std::sqrt((xm - x1) * (xm - x1) + (ym - y1) * (ym - y1));
  const double d2 = std::sqrt((xn - x2) * (xn - x2) + (yn - y2) * (yn - y2));
  const double d3 = std::sqrt((xn - x3) * (xn - x3) + (yn - y3) * (yn - y3));
  const double Xm = (d1 * s[i0].X + d0 * s[i1].X) / (d0 + d1);
  const double Ym = (d1 * s[i0].Y + d0 * s[i1].Y) / (d0 + d1);
  const double Zm = (d1 * s[i0].Z + d0 * s[i1].Z) / (d0 + d1);
  const double Xn = (d3 * s[i2].X + d2 * s[i3].X) / (d2 + d3);
  const double Yn = (d3 * s[i2].Y + d2 * s[i3].Y) / (d2 + d3);
  const double Zn = (d3 * s[i2].Z + d2 * s[i3].Z) / (d2 + d3);
  const double dm = std::sqrt((x - xm) * (x - xm) + (y - ym) * (y - ym));
  const double dn = std::sqrt((x - xn) * (x - xn) + (y - yn) * (y - yn));
  if (dm + dn == 0.0) return {0.5 * (Xm + Xn), 0.5 * (Ym + Yn), 0.5 * (Zm + Zn)};
  return {(dm * Xn + dn * Xm) / (dm + dn), (dm * Yn + dn * Ym) / (dm + dn), (dm * Zn + dn * Zm) / (dm + dn)};
}

inline Vec3 nearest_pixel(const std::vector<Sample>& s, double x, double y, double radius = 0.0) {
  std::vector<Pt> pts;
  for (std::size_t i = 0; i < s.size(); ++i) pts.push_back({s[i].px, s[i].py, i});
  const auto nn = nearest(pts, x, y);
  if (!nn || (radius > 0 && std::sqrt(nn->d2) > radius)) return {};
  return {s[nn->id].X, s[nn->id].Y, s[nn->id].Z};
}

/// Minimum within-cluster SSE over every assignment of the values to k
/// non-empty clusters (k^n enumeration; intended for n <= 12).
inline double optimal_sse(const std::vector<double>& v, int k) {
  const std::size_t n = v.size();
  std::vector<int> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
    int cnt[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += v[i];
      sq[label[i]] += v[i] * v[i];
      ++cnt[label[i]];
    }
    bool all_used = true;
    double sse = 0;
    for (int j = 0; j < k; ++j) {
      if (cnt[j] == 0) {
        all_used = false;
        break;
      }
      const double mean = sum[j] / cnt[j];
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == j) sse += (v[i] - mean) * (v[i] - mean);
      }
    }
    if (all_used && sse < best) best = sse;
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

}  // namespace oracle
