#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "stereorig/errors.hpp"
#include "stereorig/point_cloud.hpp"
#include "stereorig/scene.hpp"

namespace stereorig::cloud {

/// Concatenate fragments in order. With `voxel_mm > 0` only the first point
/// falling in each voxel of that edge length is kept.
inline PointCloud merge(std::span<const PointCloud> fragments,
                        double voxel_mm = 0.0) {
  if (!(voxel_mm >= 0.0) || !std::isfinite(voxel_mm))
    throw DomainError("voxel edge must be nonnegative");
  PointCloud out;
  std::set<std::tuple<std::int64_t, std::int64_t, std::int64_t>> seen;
  for (const auto &frag : fragments) {
    for (const auto &p : frag.points()) {
      if (voxel_mm > 0.0) {
        auto key = std::make_tuple(
            static_cast<std::int64_t>(std::floor(p.x_mm / voxel_mm)),
            static_cast<std::int64_t>(std::floor(p.y_mm / voxel_mm)),
            static_cast<std::int64_t>(std::floor(p.z_mm / voxel_mm)));
        if (!seen.insert(key).second)
          continue;
      }
      out.push_back(p);
    }
  }
  return out;
}

struct AccuracyReport {
  double recall = 0.0;
  std::optional<double> rmse_mm;         // empty when nothing was recovered
  std::optional<double> median_error_mm; //
  std::size_t recovered = 0;
  std::size_t visible = 0;
  double match_radius_mm = 0.0;
};

/// Recall and error of `cloud` against the scene. A scene point counts when
/// `visible` marks it (all points when empty) and is recovered when some
/// cloud point lies within `match_radius_mm`. Errors are nearest-neighbour
/// distances of recovered points; brute force.
inline AccuracyReport accuracy_report(const PointCloud &cloud,
                                      const scene::Scene &scene,
                                      double match_radius_mm,
                                      std::span<const std::uint8_t> visible = {}) {
  if (!(match_radius_mm > 0.0))
    throw DomainError("match radius must be positive");
  if (!visible.empty() && visible.size() != scene.points.size())
    throw DomainError("visibility mask does not match the scene");
  AccuracyReport rep;
  rep.match_radius_mm = match_radius_mm;
  std::vector<double> errors;
  const double r2 = match_radius_mm * match_radius_mm;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    if (!visible.empty() && !visible[i])
      continue;
    ++rep.visible;
    const auto &s = scene.points[i];
    double best = std::numeric_limits<double>::infinity();
    for (const auto &p : cloud.points()) {
      const double dx = p.x_mm - s.x_mm;
      const double dy = p.y_mm - s.y_mm;
      const double dz = p.z_mm - s.z_mm;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    if (best <= r2)
      errors.push_back(std::sqrt(best));
  }
  rep.recovered = errors.size();
  if (rep.visible > 0)
    rep.recall = static_cast<double>(rep.recovered) / rep.visible;
  if (!errors.empty()) {
    double ss = 0.0;
    for (double e : errors)
      ss += e * e;
    rep.rmse_mm = std::sqrt(ss / errors.size());
    std::sort(errors.begin(), errors.end());
    const std::size_t n = errors.size();
    rep.median_error_mm =
        n % 2 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  }
  return rep;
}

inline std::string format_report(const AccuracyReport &r) {
  auto opt = [](const std::optional<double> &v) {
    if (!v)
      return std::string("none");
    char b[32];
    std::snprintf(b, sizeof b, "%.6f", *v);
    return std::string(b);
  };
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "recall %.6f\nrmse_mm %s\nmedian_error_mm %s\nrecovered %zu\n"
                "visible %zu\nmatch_radius_mm %.6f\n",
                r.recall, opt(r.rmse_mm).c_str(),
                opt(r.median_error_mm).c_str(), r.recovered, r.visible,
                r.match_radius_mm);
  return buf;
}

namespace detail {
inline void put_g6(std::string &out, double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  // Both zeros print as "0".
  if (b[0] == '-' && std::strtod(b, nullptr) == 0.0)
    out += b + 1;
  else
    out += b;
}
} // namespace detail

/// ASCII PLY 1.0. Coordinates in meters, 6 significant digits, LF endings.
inline std::string export_ply(const PointCloud &cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " +
                    std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n"
                    "property float intensity\nend_header\n";
  for (const auto &p : cloud.points()) {
    detail::put_g6(out, p.x_mm / 1000.0);
    out += ' ';
    detail::put_g6(out, p.y_mm / 1000.0);
    out += ' ';
    detail::put_g6(out, p.z_mm / 1000.0);
    out += ' ';
    detail::put_g6(out, p.intensity);
    out += '\n';
  }
  return out;
}

/// Reads what export_ply writes. Heading provenance is not stored in PLY and
/// comes back as 0.
inline PointCloud import_ply(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto expect = [&](std::string_view want) {
    ++line_no;
    if (!std::getline(in, line) || line != want)
      throw ParseError(line_no, "expected '" + std::string(want) + "'");
  };
  expect("ply");
  expect("format ascii 1.0");
  ++line_no;
  std::size_t n = 0;
  {
    if (!std::getline(in, line))
      throw ParseError(line_no, "missing vertex count");
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a >> b >> n) || a != "element" || b != "vertex")
      throw ParseError(line_no, "expected 'element vertex N'");
  }
  expect("property float x");
  expect("property float y");
  expect("property float z");
  expect("property float intensity");
  expect("end_header");
  std::vector<CloudPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ++line_no;
    if (!std::getline(in, line))
      throw ParseError(line_no, "truncated vertex list");
    std::istringstream ls(line);
    double x, y, z, s;
    if (!(ls >> x >> y >> z >> s))
      throw ParseError(line_no, "malformed vertex");
    pts.push_back({x * 1000.0, y * 1000.0, z * 1000.0, s, 0});
  }
  return PointCloud(std::move(pts));
}

} // namespace stereorig::cloud
