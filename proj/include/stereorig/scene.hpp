#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stereorig/errors.hpp"
#include "stereorig/geometry.hpp"
#include "stereorig/grid.hpp"
#include "stereorig/random.hpp"

// Synthetic scenes, the rangefinder and the twin pinhole renderer.
//
// Frames: the world frame has y pointing down and the rig center at the
// origin. The rig frame rotates about y by the heading; heading 0 looks along
// +z and heading 90 looks along +x. The left camera sits at x = -a/2 and the
// right camera at x = +a/2 of the rig frame, both looking along +z.

namespace stereorig::scene {

using geometry::CameraIntrinsics;

struct ScenePoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double z_mm = 0.0;
  double intensity = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Scene {
  std::vector<ScenePoint> points;
  std::optional<std::uint64_t> seed; // seed of the last `room` directive

  void validate() const {
    if (points.empty())
      throw ValidationError("scene contains no points");
    for (const auto &p : points) {
      if (!std::isfinite(p.x_mm) || !std::isfinite(p.y_mm) ||
          !std::isfinite(p.z_mm))
        throw ValidationError("scene point has non-finite coordinates");
      if (!(p.intensity >= 0.0 && p.intensity <= 1.0))
        throw ValidationError("scene point intensity outside [0, 1]");
    }
  }
};

struct RigPose {
  double heading_deg = 0.0;
};

inline double deg_to_rad(double deg) noexcept {
  return deg * std::numbers::pi / 180.0;
}

inline Vec3 world_to_rig(const Vec3 &w, double heading_deg) noexcept {
  const double h = deg_to_rad(heading_deg);
  const double c = std::cos(h);
  const double s = std::sin(h);
  return {w.x * c - w.z * s, w.y, w.x * s + w.z * c};
}

inline Vec3 rig_to_world(const Vec3 &r, double heading_deg) noexcept {
  const double h = deg_to_rad(heading_deg);
  const double c = std::cos(h);
  const double s = std::sin(h);
  return {r.x * c + r.z * s, r.y, -r.x * s + r.z * c};
}

/// Points scattered uniformly over the six interior faces of a box centered
/// on the rig: x in [-w/2, w/2], y in [-h/2, h/2], z in [-d/2, d/2].
///
/// Draw order per point (all draws from one xorshift64* stream): a face
/// chosen with probability proportional to its area, two in-face
/// coordinates, then intensity = 0.25 + 0.75 u.
inline std::vector<ScenePoint> generate_room(double width_mm, double depth_mm,
                                             double height_mm,
                                             std::size_t n_points,
                                             std::uint64_t seed) {
  if (!(width_mm > 0.0 && depth_mm > 0.0 && height_mm > 0.0) ||
      !std::isfinite(width_mm + depth_mm + height_mm))
    throw DomainError("room dimensions must be positive and finite");
  const double hw = 0.5 * width_mm;
  const double hd = 0.5 * depth_mm;
  const double hh = 0.5 * height_mm;
  // front (+z), back (-z), right (+x), left (-x), floor (+y), ceiling (-y)
  const double areas[6] = {width_mm * height_mm, width_mm * height_mm,
                           depth_mm * height_mm, depth_mm * height_mm,
                           width_mm * depth_mm,  width_mm * depth_mm};
  double total = 0.0;
  for (double a : areas)
    total += a;

  Xorshift64Star rng(seed);
  std::vector<ScenePoint> out;
  out.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    double pick = rng.uniform() * total;
    int face = 0;
    while (face < 5 && pick >= areas[face]) {
      pick -= areas[face];
      ++face;
    }
    const double u = rng.uniform();
    const double v = rng.uniform();
    ScenePoint p;
    switch (face) {
    case 0: p = {-hw + u * width_mm, -hh + v * height_mm, hd, 0.0}; break;
    case 1: p = {-hw + u * width_mm, -hh + v * height_mm, -hd, 0.0}; break;
    case 2: p = {hw, -hh + v * height_mm, -hd + u * depth_mm, 0.0}; break;
    case 3: p = {-hw, -hh + v * height_mm, -hd + u * depth_mm, 0.0}; break;
    case 4: p = {-hw + u * width_mm, hh, -hd + v * depth_mm, 0.0}; break;
    default: p = {-hw + u * width_mm, -hh, -hd + v * depth_mm, 0.0}; break;
    }
    p.intensity = 0.25 + 0.75 * rng.uniform();
    out.push_back(p);
  }
  return out;
}

namespace detail {

inline double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto *end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw ParseError(line, "non-finite value '" + std::string(tok) + "'");
  return v;
}

inline std::uint64_t parse_u64(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  const auto *end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(line,
                     "expected an unsigned integer, got '" + std::string(tok) +
                         "'");
  return v;
}

} // namespace detail

/// Parse the line-oriented scene format:
///   p <x_mm> <y_mm> <z_mm> <intensity>
///   room <width_mm> <depth_mm> <height_mm> <n_points> seed <u64>
/// `#` starts a comment.
inline Scene load_scene(std::string_view text) {
  Scene scene;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;)
      tok.push_back(t);
    if (tok.empty())
      continue;

    if (tok[0] == "p") {
      if (tok.size() != 5)
        throw ParseError(line_no, "'p' expects 4 values");
      ScenePoint p{detail::parse_real(tok[1], line_no),
                   detail::parse_real(tok[2], line_no),
                   detail::parse_real(tok[3], line_no),
                   detail::parse_real(tok[4], line_no)};
      if (p.intensity < 0.0 || p.intensity > 1.0)
        throw ParseError(line_no, "intensity must lie in [0, 1]");
      scene.points.push_back(p);
    } else if (tok[0] == "room") {
      if (tok.size() != 7 || tok[5] != "seed")
        throw ParseError(line_no, "expected 'room <w> <d> <h> <n> seed <u64>'");
      const double w = detail::parse_real(tok[1], line_no);
      const double d = detail::parse_real(tok[2], line_no);
      const double h = detail::parse_real(tok[3], line_no);
      const std::uint64_t n = detail::parse_u64(tok[4], line_no);
      const std::uint64_t seed = detail::parse_u64(tok[6], line_no);
      if (!(w > 0.0 && d > 0.0 && h > 0.0))
        throw ParseError(line_no, "room dimensions must be positive");
      auto pts = generate_room(w, d, h, n, seed);
      scene.points.insert(scene.points.end(), pts.begin(), pts.end());
      scene.seed = seed;
    } else {
      throw ParseError(line_no, "unknown directive '" + tok[0] + "'");
    }
  }
  scene.validate();
  return scene;
}

inline Scene load_scene_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ValidationError("cannot open scene file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_scene(ss.str());
}

// ---------------------------------------------------------------------------
// Rangefinder

inline constexpr double kRangeMinMm = 100.0;
inline constexpr double kRangeMaxMm = 60000.0;

struct RangeReading {
  std::optional<double> distance_mm; // empty: no return
  double cone_half_angle_deg = 0.0;

  bool has_return() const noexcept { return distance_mm.has_value(); }
};

/// Nearest scene point (Euclidean distance from the rig center) whose bearing
/// lies within the cone around the boresight. Optional Gaussian noise.
inline RangeReading range_reading(const Scene &scene, const RigPose &pose,
                                  double cone_half_angle_deg,
                                  double noise_std_mm = 0.0,
                                  Xorshift64Star *noise = nullptr) {
  if (!(cone_half_angle_deg > 0.0 && cone_half_angle_deg <= 45.0))
    throw DomainError("cone half angle must lie in (0, 45] degrees");
  const double cos_cone = std::cos(deg_to_rad(cone_half_angle_deg));
  std::optional<double> best;
  for (const auto &p : scene.points) {
    const Vec3 r = world_to_rig({p.x_mm, p.y_mm, p.z_mm}, pose.heading_deg);
    const double dist = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
    if (dist < kRangeMinMm || dist > kRangeMaxMm)
      continue;
    if (r.z < dist * cos_cone)
      continue;
    if (!best || dist < *best)
      best = dist;
  }
  if (best && noise != nullptr && noise_std_mm > 0.0)
    best = std::clamp(*best + noise_std_mm * noise->normal(), kRangeMinMm,
                      kRangeMaxMm);
  return {best, cone_half_angle_deg};
}

// ---------------------------------------------------------------------------
// Renderer

struct CaptureInfo {
  std::size_t shot_index = 0;
  double heading_deg = 0.0;
  double baseline_mm = 0.0;
  CameraIntrinsics intrinsics;
  std::optional<double> range_mm;
};

/// A scene point seen in both panels. `u`, `v` are its exact left-panel
/// projection; `depth_mm` is its camera-frame depth.
struct Feature {
  std::size_t point_index = 0;
  double u = 0.0;
  double v = 0.0;
  double depth_mm = 0.0;
  double disparity_px = 0.0;
};

inline constexpr std::int32_t kNoOwner = -1;

struct StereoPair {
  Image left;
  Image right;
  // f a / z of the owning point at left pixels whose owner is drawn in both
  // panels; kNoValue elsewhere.
  Grid<double> truth_disparity;
  Grid<std::int32_t> left_owner;
  std::vector<Feature> features;
  CaptureInfo info;
};

namespace detail {

struct Projected {
  std::int32_t index;
  double u_left;
  double u_right;
  double v;
  double z;
  bool in_left;
  bool in_right;
};

inline bool in_frustum(double u, double v, const CameraIntrinsics &cam) {
  return u >= -0.5 && u < cam.width_px - 0.5 && v >= -0.5 &&
         v < cam.height_px - 0.5;
}

// Z-buffered blob splat: the nearest point owns each pixel, ties go to the
// lower point index. Same result as painting far-to-near.
inline void splat(Image &img, Grid<std::int32_t> &owner, Grid<double> &zbuf,
                  const Projected &p, double u, double intensity,
                  double radius) {
  const double sigma = 0.5 * radius;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const int x0 = std::max(0, static_cast<int>(std::ceil(u - radius)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::floor(u + radius)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(p.v - radius)));
  const int y1 =
      std::min(img.height() - 1, static_cast<int>(std::floor(p.v + radius)));
  const double r2max = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - u;
      const double dy = y - p.v;
      const double r2 = dx * dx + dy * dy;
      if (r2 > r2max)
        continue;
      const double zb = zbuf(x, y);
      const std::int32_t ob = owner(x, y);
      if (ob != kNoOwner && (zb < p.z || (zb == p.z && ob < p.index)))
        continue;
      zbuf(x, y) = p.z;
      owner(x, y) = p.index;
      img(x, y) = intensity * std::exp(-r2 * inv_two_sigma2);
    }
  }
}

} // namespace detail

/// Render both panels of the rig at `pose` with separation `baseline_mm`.
/// Every point is drawn as a truncated Gaussian blob (sigma = radius / 2,
/// cut off at `blob_radius_px`) scaled by its intensity.
inline StereoPair render_stereo_pair(const Scene &scene, const RigPose &pose,
                                     double baseline_mm,
                                     const CameraIntrinsics &cam,
                                     double blob_radius_px) {
  cam.validate();
  if (!(std::isfinite(baseline_mm) && baseline_mm >= 0.0))
    throw DomainError("baseline must be nonnegative");
  if (!(blob_radius_px >= 1.0) || !std::isfinite(blob_radius_px))
    throw DomainError("blob radius must be at least 1 px");

  const int w = cam.width_px;
  const int h = cam.height_px;
  const double half = 0.5 * baseline_mm;
  const double f = cam.focal_px;

  std::vector<detail::Projected> proj;
  proj.reserve(scene.points.size());
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const auto &sp = scene.points[i];
    const Vec3 r = world_to_rig({sp.x_mm, sp.y_mm, sp.z_mm}, pose.heading_deg);
    if (!(r.z > 0.0))
      continue;
    detail::Projected p;
    p.index = static_cast<std::int32_t>(i);
    p.z = r.z;
    p.u_left = cam.cx() + f * (r.x + half) / r.z;
    p.u_right = cam.cx() + f * (r.x - half) / r.z;
    p.v = cam.cy() + f * r.y / r.z;
    p.in_left = detail::in_frustum(p.u_left, p.v, cam);
    p.in_right = detail::in_frustum(p.u_right, p.v, cam);
    if (p.in_left || p.in_right)
      proj.push_back(p);
  }

  StereoPair out;
  out.left = Image(w, h, 0.0);
  out.right = Image(w, h, 0.0);
  out.truth_disparity = Grid<double>(w, h, kNoValue);
  out.left_owner = Grid<std::int32_t>(w, h, kNoOwner);
  Grid<std::int32_t> right_owner(w, h, kNoOwner);
  Grid<double> zl(w, h, std::numeric_limits<double>::infinity());
  Grid<double> zr(w, h, std::numeric_limits<double>::infinity());

  std::vector<std::int32_t> slot(scene.points.size(), -1);
  for (std::size_t k = 0; k < proj.size(); ++k) {
    const auto &p = proj[k];
    slot[static_cast<std::size_t>(p.index)] = static_cast<std::int32_t>(k);
    const double intensity = scene.points[static_cast<std::size_t>(p.index)].intensity;
    if (p.in_left)
      detail::splat(out.left, out.left_owner, zl, p, p.u_left, intensity,
                    blob_radius_px);
    if (p.in_right)
      detail::splat(out.right, right_owner, zr, p, p.u_right, intensity,
                    blob_radius_px);
  }

  std::vector<char> owns_left(proj.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t o = out.left_owner(x, y);
      if (o == kNoOwner)
        continue;
      const auto k = static_cast<std::size_t>(slot[static_cast<std::size_t>(o)]);
      if (!proj[k].in_right)
        continue;
      out.truth_disparity(x, y) = f * baseline_mm / proj[k].z;
      owns_left[k] = 1;
    }
  }
  for (std::size_t k = 0; k < proj.size(); ++k) {
    if (!owns_left[k])
      continue;
    const auto &p = proj[k];
    out.features.push_back({static_cast<std::size_t>(p.index), p.u_left, p.v,
                            p.z, f * baseline_mm / p.z});
  }

  out.info.heading_deg = pose.heading_deg;
  out.info.baseline_mm = baseline_mm;
  out.info.intrinsics = cam;
  return out;
}

} // namespace stereorig::scene
