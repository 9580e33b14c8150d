#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <vector>

#include "stereorig/errors.hpp"
#include "stereorig/geometry.hpp"
#include "stereorig/grid.hpp"
#include "stereorig/point_cloud.hpp"
#include "stereorig/scene.hpp"

// Parallax compensation, correlation matching, depth maps and back-projection.
// The left panel is the reference; the right panel is the one shifted.

namespace stereorig::vision {

using geometry::CameraIntrinsics;

struct MatchParams {
  int window_px = 7;
  int search_range_px = 8;
  double min_score = 0.6;
  double min_texture = 0.02;
  bool subpixel = true;

  void validate() const {
    if (window_px < 3 || window_px % 2 == 0)
      throw DomainError("correlation window must be odd and at least 3");
    if (search_range_px < 0)
      throw DomainError("search range must be nonnegative");
    if (!std::isfinite(min_score) || !std::isfinite(min_texture) ||
        min_texture < 0.0)
      throw DomainError("invalid score or texture threshold");
  }
};

struct DisparityMap {
  Grid<double> disparity; // kNoValue where unmatched
  std::size_t matched = 0;
  int shift_px = 0;       // compensation applied to the right panel
  MatchParams params;
};

struct DepthMap {
  Grid<double> depth_mm; // kNoValue where unknown
  double baseline_mm = 0.0;
  CameraIntrinsics intrinsics;
  double heading_deg = 0.0;
};

/// Translate every row by `shift_px` (positive moves content right), zero
/// filling the vacated columns.
inline Image shift_image(const Image &img, int shift_px) {
  if (std::abs(shift_px) >= img.width() && img.width() > 0)
    throw DomainError("shift magnitude must be smaller than the image width");
  Image out(img.width(), img.height(), 0.0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const int src = x - shift_px;
      if (src >= 0 && src < img.width())
        out(x, y) = img(src, y);
    }
  }
  return out;
}

/// Rangefinder-predicted disparity rounded to whole pixels. Throws
/// NoReferenceError when the reading has no return.
inline int compensation_shift(const scene::RangeReading &range,
                              double baseline_mm, const CameraIntrinsics &cam) {
  if (!range.has_return())
    throw NoReferenceError("range reading has no return");
  return static_cast<int>(
      std::llround(geometry::parallax_px(*range.distance_mm, baseline_mm, cam)));
}

namespace detail {

struct WindowStats {
  double mean = 0.0;
  double ss = 0.0; // sum of squared deviations
};

// Zero padding outside the image.
inline WindowStats window_stats(const Image &img, int cx, int cy, int half) {
  double sum = 0.0;
  double sum2 = 0.0;
  const int n = (2 * half + 1) * (2 * half + 1);
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) {
      const double v = img.at_or(cx + dx, cy + dy, 0.0);
      sum += v;
      sum2 += v * v;
    }
  const double mean = sum / n;
  return {mean, std::max(0.0, sum2 - n * mean * mean)};
}

inline double zncc(const Image &left, const Image &right, int x, int y,
                   int xr, int half, const WindowStats &ls) {
  const WindowStats rs = window_stats(right, xr, y, half);
  if (ls.ss <= 0.0 || rs.ss <= 1e-12)
    return -1.0;
  double cross = 0.0;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx)
      cross += (left.at_or(x + dx, y + dy, 0.0) - ls.mean) *
               (right.at_or(xr + dx, y + dy, 0.0) - rs.mean);
  return cross / std::sqrt(ls.ss * rs.ss);
}

} // namespace detail

/// Texture gate: window standard deviation at least `min_texture`.
inline bool is_textured(const Image &img, int x, int y,
                        const MatchParams &params) {
  const int half = params.window_px / 2;
  const auto ls = detail::window_stats(img, x, y, half);
  const double n = params.window_px * params.window_px;
  return ls.ss > 0.0 && ls.ss >= params.min_texture * params.min_texture * n;
}

/// Zero-mean NCC block matching after shifting the right panel by
/// `shift_px`. Residual offsets run over [-search, +search], clipped so the
/// disparity stays nonnegative. Ties go to the smaller |offset|, then to the
/// negative offset. A parabola through the peak and its neighbours gives the
/// sub-pixel offset, clamped to half a pixel.
inline DisparityMap match_correlation(const Image &left, const Image &right,
                                      int shift_px, const MatchParams &params) {
  params.validate();
  if (left.width() != right.width() || left.height() != right.height())
    throw DomainError("stereo panels differ in size");
  if (shift_px < 0)
    throw DomainError("compensation shift must be nonnegative");

  const Image shifted =
      shift_px == 0 ? right : shift_image(right, shift_px);
  const int half = params.window_px / 2;
  const int r = params.search_range_px;
  const int lo = std::max(-r, -shift_px);
  const int window_n = params.window_px * params.window_px;
  const double min_ss = params.min_texture * params.min_texture * window_n;

  DisparityMap out;
  out.disparity = Grid<double>(left.width(), left.height(), kNoValue);
  out.shift_px = shift_px;
  out.params = params;

  std::vector<double> scores(static_cast<std::size_t>(2 * r + 1));
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) {
      const auto ls = detail::window_stats(left, x, y, half);
      if (ls.ss <= 0.0 || ls.ss < min_ss)
        continue;

      for (int d = lo; d <= r; ++d)
        scores[static_cast<std::size_t>(d + r)] =
            detail::zncc(left, shifted, x, y, x - d, half, ls);

      // Visit 0, -1, +1, -2, +2, ... and keep strictly better scores only.
      int best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      auto consider = [&](int d) {
        const double s = scores[static_cast<std::size_t>(d + r)];
        if (s > best_score) {
          best_score = s;
          best = d;
        }
      };
      consider(0);
      for (int k = 1; k <= r; ++k) {
        if (-k >= lo)
          consider(-k);
        consider(k);
      }
      if (best_score < params.min_score)
        continue;

      double offset = 0.0;
      if (params.subpixel && best - 1 >= lo && best + 1 <= r) {
        const double sm = scores[static_cast<std::size_t>(best - 1 + r)];
        const double s0 = best_score;
        const double sp = scores[static_cast<std::size_t>(best + 1 + r)];
        const double denom = sm - 2.0 * s0 + sp;
        if (denom < 0.0)
          offset = std::clamp(0.5 * (sm - sp) / denom, -0.5, 0.5);
      }
      out.disparity(x, y) = shift_px + best + offset;
      ++out.matched;
    }
  }
  return out;
}

inline DepthMap depth_map_from_disparity(const DisparityMap &disp,
                                         double baseline_mm,
                                         const CameraIntrinsics &cam,
                                         double heading_deg = 0.0) {
  cam.validate();
  if (disp.disparity.width() != cam.width_px ||
      disp.disparity.height() != cam.height_px)
    throw DomainError("disparity map does not match the intrinsics");
  DepthMap out;
  out.depth_mm = Grid<double>(cam.width_px, cam.height_px, kNoValue);
  out.baseline_mm = baseline_mm;
  out.intrinsics = cam;
  out.heading_deg = heading_deg;
  if (!(baseline_mm > 0.0))
    return out; // zero baseline: every pixel is at infinity
  auto src = disp.disparity.data();
  auto dst = out.depth_mm.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double d = src[i];
    if (has_value(d) && d > 0.0)
      dst[i] = geometry::triangulate_depth(d, baseline_mm, cam);
  }
  return out;
}

/// World-frame position of left-panel pixel (u, v) at camera depth z.
inline scene::Vec3 back_project_pixel(double u, double v, double depth_mm,
                                      double baseline_mm,
                                      const CameraIntrinsics &cam,
                                      double heading_deg) {
  const double x_cam = (u - cam.cx()) * depth_mm / cam.focal_px;
  const double y_cam = (v - cam.cy()) * depth_mm / cam.focal_px;
  // Left camera center sits at x = -a/2 in the rig frame.
  return scene::rig_to_world({x_cam - 0.5 * baseline_mm, y_cam, depth_mm},
                             heading_deg);
}

/// Every finite-depth pixel as a world point. `shade`, when given, supplies
/// per-point intensity (normally the left panel).
inline cloud::PointCloud back_project(const DepthMap &depth,
                                      const scene::RigPose &pose,
                                      std::size_t heading_index = 0,
                                      const Image *shade = nullptr) {
  cloud::PointCloud out;
  for (int y = 0; y < depth.depth_mm.height(); ++y) {
    for (int x = 0; x < depth.depth_mm.width(); ++x) {
      const double z = depth.depth_mm(x, y);
      if (!has_value(z) || !(z > 0.0) || !std::isfinite(z))
        continue;
      const auto w = back_project_pixel(x, y, z, depth.baseline_mm,
                                        depth.intrinsics, pose.heading_deg);
      const double shade_v = shade != nullptr ? shade->at_or(x, y, 0.0) : 0.0;
      out.push_back({w.x, w.y, w.z, shade_v, heading_index});
    }
  }
  return out;
}

} // namespace stereorig::vision
