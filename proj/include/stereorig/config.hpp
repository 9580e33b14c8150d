#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stereorig/errors.hpp"
#include "stereorig/geometry.hpp"
#include "stereorig/io.hpp"
#include "stereorig/mechanics.hpp"
#include "stereorig/planner.hpp"
#include "stereorig/vision.hpp"

// Run configuration: UTF-8 `key = value` lines, dotted sections, `#`
// comments. Unknown keys are rejected.

namespace stereorig::config {

inline constexpr int kDefaultWidth = 320;
inline constexpr int kDefaultHeight = 240;
inline constexpr double kDefaultHfovDeg = 60.0;

struct RunConfig {
  geometry::CameraIntrinsics intrinsics{
      geometry::focal_for_fov(kDefaultWidth, kDefaultHfovDeg), kDefaultWidth,
      kDefaultHeight};
  mechanics::ActuationCalibration calibration;
  planner::CapturePolicy policy;
  double initial_baseline_mm = 100.0;
  double cone_half_angle_deg = 15.0;
  double range_noise_std_mm = 0.0;
  double blob_radius_px = 3.0;
  vision::MatchParams vision;
  int fallback_search_px = 40; // search range when the rangefinder is blind
  double voxel_mm = 0.0;
  double match_radius_mm = 0.0; // 0: three depth-resolution steps
  std::string scene_path;
  std::string output_dir;
  std::uint64_t seed = 1;
  bool with_error = false;

  planner::ScanSettings scan_settings() const {
    planner::ScanSettings s;
    s.policy = policy;
    s.calibration = calibration;
    s.intrinsics = intrinsics;
    s.with_error = with_error;
    s.cone_half_angle_deg = cone_half_angle_deg;
    s.range_noise_std_mm = range_noise_std_mm;
    s.blob_radius_px = blob_radius_px;
    s.seed = seed;
    return s;
  }

  mechanics::RigState initial_rig() const {
    mechanics::RigState rig;
    rig.limits = policy.limits;
    rig.baseline_mm = initial_baseline_mm;
    return rig;
  }

  void validate() const {
    try {
      intrinsics.validate();
      calibration.validate();
      policy.validate();
      vision.validate();
      initial_rig().validate();
    } catch (const DomainError &e) {
      throw ConfigError(e.what());
    }
    if (!(cone_half_angle_deg > 0.0 && cone_half_angle_deg <= 45.0))
      throw ConfigError("rangefinder.cone_half_angle_deg must lie in (0, 45]");
    if (!(range_noise_std_mm >= 0.0))
      throw ConfigError("rangefinder.noise_std_mm must be nonnegative");
    if (!(blob_radius_px >= 1.0))
      throw ConfigError("render.blob_radius_px must be at least 1");
    if (fallback_search_px < 0)
      throw ConfigError("vision.fallback_search must be nonnegative");
    if (!(voxel_mm >= 0.0))
      throw ConfigError("cloud.voxel_mm must be nonnegative");
    if (!(match_radius_mm >= 0.0))
      throw ConfigError("report.match_radius_mm must be nonnegative");
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_real(const std::string &key, const std::string &v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return out;
}

inline long long to_int(const std::string &key, const std::string &v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

inline std::uint64_t to_u64(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

// Shortest text that reads back to the same double.
inline std::string real_str(double v) {
  char b[64];
  const auto r = std::to_chars(b, b + sizeof b, v);
  return std::string(b, r.ptr);
}

struct Field {
  const char *key;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

#define STEREORIG_REAL(KEY, MEMBER)                                            \
  Field {                                                                      \
    KEY, [](RunConfig &c, const std::string &v) { c.MEMBER = to_real(KEY, v); }, \
        [](const RunConfig &c) { return real_str(c.MEMBER); }                  \
  }
#define STEREORIG_INT(KEY, MEMBER)                                             \
  Field {                                                                      \
    KEY,                                                                       \
        [](RunConfig &c, const std::string &v) {                               \
          c.MEMBER = static_cast<int>(to_int(KEY, v));                         \
        },                                                                     \
        [](const RunConfig &c) { return std::to_string(c.MEMBER); }            \
  }

inline const std::vector<Field> &fields() {
  static const std::vector<Field> table = {
      {"scene", [](RunConfig &c, const std::string &v) { c.scene_path = v; },
       [](const RunConfig &c) { return c.scene_path; }},
      {"seed",
       [](RunConfig &c, const std::string &v) { c.seed = to_u64("seed", v); },
       [](const RunConfig &c) { return std::to_string(c.seed); }},
      {"with_error",
       [](RunConfig &c, const std::string &v) {
         c.with_error = to_bool("with_error", v);
       },
       [](const RunConfig &c) {
         return std::string(c.with_error ? "true" : "false");
       }},
      STEREORIG_INT("camera.width", intrinsics.width_px),
      STEREORIG_INT("camera.height", intrinsics.height_px),
      STEREORIG_REAL("camera.focal_px", intrinsics.focal_px),
      STEREORIG_REAL("actuation.baseline_mm_per_pulse",
                     calibration.baseline_mm_per_pulse),
      STEREORIG_REAL("actuation.rotation_deg_per_pulse",
                     calibration.rotation_deg_per_pulse),
      STEREORIG_REAL("actuation.pwm_freq_hz", calibration.pwm_freq_hz),
      STEREORIG_REAL("actuation.pwm_duty", calibration.pwm_duty),
      STEREORIG_REAL("actuation.systematic_scale_error",
                     calibration.systematic_scale_error),
      STEREORIG_REAL("actuation.noise_std", calibration.noise_std),
      STEREORIG_REAL("rig.baseline_min_mm", policy.limits.min_mm),
      STEREORIG_REAL("rig.baseline_max_mm", policy.limits.max_mm),
      STEREORIG_REAL("rig.initial_baseline_mm", initial_baseline_mm),
      {"policy.mode",
       [](RunConfig &c, const std::string &v) {
         if (v == "ratio")
           c.policy.mode = planner::PolicyMode::TargetRatio;
         else if (v == "disparity")
           c.policy.mode = planner::PolicyMode::TargetDisparity;
         else
           throw ConfigError("policy.mode: expected 'ratio' or 'disparity'");
       },
       [](const RunConfig &c) {
         return std::string(c.policy.mode == planner::PolicyMode::TargetRatio
                                ? "ratio"
                                : "disparity");
       }},
      STEREORIG_REAL("policy.target", policy.target),
      STEREORIG_REAL("policy.overlap", policy.overlap_fraction),
      STEREORIG_REAL("rangefinder.cone_half_angle_deg", cone_half_angle_deg),
      STEREORIG_REAL("rangefinder.noise_std_mm", range_noise_std_mm),
      STEREORIG_REAL("render.blob_radius_px", blob_radius_px),
      STEREORIG_INT("vision.window", vision.window_px),
      STEREORIG_INT("vision.search", vision.search_range_px),
      STEREORIG_REAL("vision.min_score", vision.min_score),
      STEREORIG_REAL("vision.min_texture", vision.min_texture),
      {"vision.subpixel",
       [](RunConfig &c, const std::string &v) {
         c.vision.subpixel = to_bool("vision.subpixel", v);
       },
       [](const RunConfig &c) {
         return std::string(c.vision.subpixel ? "true" : "false");
       }},
      STEREORIG_INT("vision.fallback_search", fallback_search_px),
      STEREORIG_REAL("cloud.voxel_mm", voxel_mm),
      STEREORIG_REAL("report.match_radius_mm", match_radius_mm),
  };
  return table;
}

#undef STEREORIG_REAL
#undef STEREORIG_INT

} // namespace detail

/// Parse config text. `base_dir` resolves a relative scene path. The
/// STEREORIG_SEED environment variable, when set, overrides `seed`.
inline RunConfig parse(std::string_view text,
                       const std::filesystem::path &base_dir = {}) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const std::string line = detail::trim(raw);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto &table = detail::fields();
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const detail::Field &f) { return key == f.key; });
    if (it == table.end())
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    it->set(cfg, value);
  }
  if (const char *env = std::getenv("STEREORIG_SEED"); env && *env)
    cfg.seed = detail::to_u64("STEREORIG_SEED", env);
  if (!cfg.scene_path.empty()) {
    std::filesystem::path p(cfg.scene_path);
    if (p.is_relative() && !base_dir.empty())
      p = base_dir / p;
    if (!std::filesystem::exists(p))
      throw ConfigError("scene file '" + p.string() + "' does not exist");
    cfg.scene_path = std::filesystem::absolute(p).lexically_normal().string();
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load(const std::string &path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const ValidationError &) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  return parse(text, std::filesystem::path(path).parent_path());
}

/// Every key with its effective value, one `key = value` per line.
inline std::string manifest(const RunConfig &cfg) {
  std::string out;
  for (const auto &f : detail::fields())
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

} // namespace stereorig::config
