#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stereorig/cloud.hpp"
#include "stereorig/config.hpp"
#include "stereorig/geometry.hpp"
#include "stereorig/planner.hpp"
#include "stereorig/scene.hpp"
#include "stereorig/vision.hpp"

// Captures -> disparity -> depth -> world points, plus the checks against
// the renderer's ground truth.

namespace stereorig::pipeline {

struct ReconstructOptions {
  vision::MatchParams match;
  int fallback_search_px = 40;
  double voxel_mm = 0.0;
  double match_radius_mm = 0.0; // 0: three depth-resolution steps

  static ReconstructOptions from(const config::RunConfig &cfg) {
    return {cfg.vision, cfg.fallback_search_px, cfg.voxel_mm,
            cfg.match_radius_mm};
  }
};

/// Pixel-level matcher quality over pixels that carry ground truth and pass
/// the texture gate.
struct MatchStats {
  std::size_t textured_covered = 0;
  std::size_t matched = 0;
  std::size_t within_one_px = 0;
  std::size_t depth_within_budget = 0; // |z - z_true| < 2 resolution steps

  double within_one_px_fraction() const noexcept {
    return textured_covered ? double(within_one_px) / textured_covered : 0.0;
  }
  double depth_ok_fraction() const noexcept {
    return matched ? double(depth_within_budget) / matched : 0.0;
  }

  MatchStats &operator+=(const MatchStats &o) noexcept {
    textured_covered += o.textured_covered;
    matched += o.matched;
    within_one_px += o.within_one_px;
    depth_within_budget += o.depth_within_budget;
    return *this;
  }
};

struct CaptureResult {
  int shift_px = 0;
  bool ranged = false;
  vision::DisparityMap disparity;
  vision::DepthMap depth;
  MatchStats stats;
};

struct Reconstruction {
  std::vector<CaptureResult> captures;
  cloud::PointCloud cloud;
  // Exact feature projections pushed through the same triangulation and
  // back-projection, bypassing correlation.
  cloud::PointCloud truth_cloud;
  std::vector<std::uint8_t> visible;
  double median_depth_mm = 0.0;
  double median_baseline_mm = 0.0;
  double depth_resolution_mm = 0.0;
  cloud::AccuracyReport report;
  cloud::AccuracyReport truth_report;
  MatchStats stats;
};

inline double median(std::vector<double> v) {
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline MatchStats score_against_truth(const scene::StereoPair &pair,
                                      const vision::DisparityMap &disp,
                                      const vision::MatchParams &params) {
  MatchStats s;
  const auto &cam = pair.info.intrinsics;
  const double a = pair.info.baseline_mm;
  for (int y = 0; y < pair.left.height(); ++y) {
    for (int x = 0; x < pair.left.width(); ++x) {
      const double t = pair.truth_disparity(x, y);
      if (!has_value(t) || !(t > 0.0) ||
          !vision::is_textured(pair.left, x, y, params))
        continue;
      ++s.textured_covered;
      const double d = disp.disparity(x, y);
      if (!has_value(d))
        continue;
      ++s.matched;
      if (std::abs(d - t) <= 1.0)
        ++s.within_one_px;
      if (d > 0.0) {
        const double z_true = geometry::triangulate_depth(t, a, cam);
        const double z = geometry::triangulate_depth(d, a, cam);
        if (std::abs(z - z_true) <
            2.0 * geometry::depth_resolution_mm(z_true, a, cam))
          ++s.depth_within_budget;
      }
    }
  }
  return s;
}

/// Match one capture with rangefinder compensation; without a range return
/// the search starts at zero and spans `fallback_search_px`.
inline CaptureResult process_capture(const scene::StereoPair &pair,
                                     const ReconstructOptions &opt) {
  CaptureResult out;
  vision::MatchParams params = opt.match;
  const auto &info = pair.info;
  try {
    out.shift_px = vision::compensation_shift(
        {info.range_mm, 0.0}, info.baseline_mm, info.intrinsics);
    out.ranged = true;
  } catch (const NoReferenceError &) {
    out.shift_px = 0;
    params.search_range_px = opt.fallback_search_px;
  }
  out.disparity =
      vision::match_correlation(pair.left, pair.right, out.shift_px, params);
  out.depth = vision::depth_map_from_disparity(
      out.disparity, info.baseline_mm, info.intrinsics, info.heading_deg);
  out.stats = score_against_truth(pair, out.disparity, params);
  return out;
}

inline Reconstruction reconstruct(const scene::Scene &scene,
                                  const std::vector<scene::StereoPair> &captures,
                                  const ReconstructOptions &opt) {
  Reconstruction rec;
  rec.visible.assign(scene.points.size(), 0);
  std::vector<cloud::PointCloud> fragments;
  std::vector<double> depths;
  std::vector<double> baselines;

  for (const auto &pair : captures) {
    const auto &info = pair.info;
    auto res = process_capture(pair, opt);
    fragments.push_back(vision::back_project(res.depth, {info.heading_deg},
                                             info.shot_index, &pair.left));
    rec.stats += res.stats;
    baselines.push_back(info.baseline_mm);

    for (const auto &f : pair.features) {
      rec.visible[f.point_index] = 1;
      depths.push_back(f.depth_mm);
      if (!(info.baseline_mm > 0.0))
        continue;
      const double z = geometry::triangulate_depth(
          f.disparity_px, info.baseline_mm, info.intrinsics);
      const auto w = vision::back_project_pixel(
          f.u, f.v, z, info.baseline_mm, info.intrinsics, info.heading_deg);
      rec.truth_cloud.push_back({w.x, w.y, w.z,
                                 scene.points[f.point_index].intensity,
                                 info.shot_index});
    }
    rec.captures.push_back(std::move(res));
  }

  rec.cloud = cloud::merge(fragments, opt.voxel_mm);
  rec.median_depth_mm = median(depths);
  rec.median_baseline_mm = median(baselines);
  if (rec.median_depth_mm > 0.0 && rec.median_baseline_mm > 0.0 &&
      !captures.empty())
    rec.depth_resolution_mm = geometry::depth_resolution_mm(
        rec.median_depth_mm, rec.median_baseline_mm,
        captures.front().info.intrinsics);

  double radius = opt.match_radius_mm;
  if (radius <= 0.0)
    radius = rec.depth_resolution_mm > 0.0 ? 3.0 * rec.depth_resolution_mm
                                           : 1.0;
  rec.report = cloud::accuracy_report(rec.cloud, scene, radius, rec.visible);
  rec.truth_report =
      cloud::accuracy_report(rec.truth_cloud, scene, radius, rec.visible);
  return rec;
}

} // namespace stereorig::pipeline
