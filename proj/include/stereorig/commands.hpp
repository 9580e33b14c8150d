#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stereorig/cloud.hpp"
#include "stereorig/config.hpp"
#include "stereorig/errors.hpp"
#include "stereorig/io.hpp"
#include "stereorig/mechanics.hpp"
#include "stereorig/pgm.hpp"
#include "stereorig/pipeline.hpp"
#include "stereorig/planner.hpp"
#include "stereorig/scene.hpp"
#include "stereorig/vision.hpp"

// Subcommand bodies. Each returns the process exit status:
// 0 success, 2 input or configuration error, 3 internal invariant violation.

namespace stereorig::commands {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

inline int guarded(std::ostream &err, const std::function<void()> &body) {
  try {
    body();
    return kExitOk;
  } catch (const InvariantError &e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << "\n";
  } catch (const ParseError &e) {
    err << "parse error: " << e.what() << "\n";
  } catch (const CalibrationError &e) {
    err << "calibration error: " << e.what() << "\n";
  } catch (const ValidationError &e) {
    err << "input error: " << e.what() << "\n";
  } catch (const DomainError &e) {
    err << "input error: " << e.what() << "\n";
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}

namespace detail {

inline std::string fmt(const char *f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

inline void ensure_dir(const std::string &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ValidationError("cannot create output directory '" + dir + "'");
}

inline std::string join(const std::string &dir, const std::string &name) {
  return (std::filesystem::path(dir) / name).string();
}

} // namespace detail

/// Full autonomous scan: capture, match, reconstruct, write artifacts.
inline int cmd_scan(const std::string &config_path, const std::string &out_dir,
                    std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto cfg = config::load(config_path);
    if (cfg.scene_path.empty())
      throw ConfigError("no scene file configured (key 'scene')");
    const auto scene = scene::load_scene_file(cfg.scene_path);
    detail::ensure_dir(out_dir);
    io::write_file(detail::join(out_dir, "manifest.txt"),
                   config::manifest(cfg));

    const auto scan =
        planner::run_scan(scene, cfg.scan_settings(), cfg.initial_rig());
    const auto rec = pipeline::reconstruct(
        scene, scan.captures, pipeline::ReconstructOptions::from(cfg));

    std::string log;
    for (const auto &s : scan.shot_log)
      log += planner::format_shot(s) + "\n";
    io::write_file(detail::join(out_dir, "shots.log"), log);

    for (const auto &pair : scan.captures) {
      const auto i = std::to_string(pair.info.shot_index);
      io::write_file(detail::join(out_dir, "shot_" + i + "_L.pgm"),
                     pgm::encode(pgm::from_image(pair.left)));
      io::write_file(detail::join(out_dir, "shot_" + i + "_R.pgm"),
                     pgm::encode(pgm::from_image(pair.right)));
    }
    io::write_file(detail::join(out_dir, "cloud.ply"),
                   cloud::export_ply(rec.cloud));

    std::string report = "captures " + std::to_string(scan.captures.size()) +
                         "\n" + cloud::format_report(rec.report);
    report += "truth_recall " + detail::fmt("%.6f", rec.truth_report.recall) +
              "\n";
    report += "truth_rmse_mm " +
              (rec.truth_report.rmse_mm
                   ? detail::fmt("%.6g", *rec.truth_report.rmse_mm)
                   : std::string("none")) +
              "\n";
    report += "median_depth_mm " + detail::fmt("%.3f", rec.median_depth_mm) +
              "\n";
    report += "depth_resolution_mm " +
              detail::fmt("%.3f", rec.depth_resolution_mm) + "\n";
    report += "textured_covered_px " +
              std::to_string(rec.stats.textured_covered) + "\n";
    report += "within_1px_fraction " +
              detail::fmt("%.6f", rec.stats.within_one_px_fraction()) + "\n";
    report += "depth_within_2res_fraction " +
              detail::fmt("%.6f", rec.stats.depth_ok_fraction()) + "\n";
    report += "cloud_points " + std::to_string(rec.cloud.size()) + "\n";
    report += "final_rotation_deg " +
              detail::fmt("%.3f", scan.final_rig.cumulative_rotation_deg) +
              "\n";
    report += "actuation_time_s " +
              detail::fmt("%.6f", scan.actuation_time_s) + "\n";
    io::write_file(detail::join(out_dir, "report.txt"), report);

    if (scan.captures.size() != scan.schedule.size())
      throw InvariantError("capture count differs from the schedule");
    out << report;
  });
}

/// Print the rotation schedule and its nominal pulse plans.
inline int cmd_plan(const std::string &config_path, const std::string &out_dir,
                    std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto cfg = config::load(config_path);
    if (!out_dir.empty()) {
      detail::ensure_dir(out_dir);
      io::write_file(detail::join(out_dir, "manifest.txt"),
                     config::manifest(cfg));
    }
    const double fov = geometry::horizontal_fov_deg(cfg.intrinsics);
    const auto schedule =
        planner::rotation_schedule(fov, cfg.policy.overlap_fraction);
    if (schedule.size() <
        static_cast<std::size_t>(std::ceil(360.0 / fov - 1e-9)))
      throw InvariantError("schedule shorter than the field of view allows");

    out << "fov_deg " << detail::fmt("%.6f", fov) << "\n";
    out << "step_deg "
        << detail::fmt("%.6f", fov * (1.0 - cfg.policy.overlap_fraction))
        << "\n";
    out << "headings " << schedule.size() << "\n";
    double heading = 0.0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      out << "heading " << i << " " << detail::fmt("%.3f", heading) << "\n";
      heading += schedule[i];
    }
    std::int64_t pulses = 0;
    double duration = 0.0;
    double on_time = 0.0;
    double residual_sum = 0.0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const auto plan =
          mechanics::pulses_for_rotation(schedule[i], cfg.calibration);
      const auto t = mechanics::pwm_timing(plan.command);
      pulses += plan.command.pulse_count;
      duration += t.total_duration_s;
      on_time += t.total_on_time_s;
      residual_sum += plan.residual;
      out << "increment " << i << " delta_deg "
          << detail::fmt("%.3f", schedule[i]) << " pulses "
          << plan.command.pulse_count << " residual_deg "
          << detail::fmt("%.3f", plan.residual) << " duration_s "
          << detail::fmt("%.6g", t.total_duration_s) << " on_time_s "
          << detail::fmt("%.6g", t.total_on_time_s) << "\n";
    }
    out << "total_pulses " << pulses << "\n";
    out << "total_duration_s " << detail::fmt("%.6g", duration) << "\n";
    out << "total_on_time_s " << detail::fmt("%.6g", on_time) << "\n";
    out << "net_residual_deg " << detail::fmt("%.3f", residual_sum) << "\n";
  });
}

/// Fit the actuated/commanded scale from `commanded measured` rows.
inline int cmd_calibrate(const std::string &data_path, double rate_per_pulse,
                         std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto text = io::read_file(data_path);
    std::vector<double> commanded;
    std::vector<double> measured;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto h = line.find('#'); h != std::string::npos)
        line.erase(h);
      std::istringstream ls(line);
      std::string a, b, extra;
      if (!(ls >> a))
        continue;
      if (!(ls >> b) || (ls >> extra))
        throw ParseError(line_no, "expected 'commanded measured'");
      commanded.push_back(scene::detail::parse_real(a, line_no));
      measured.push_back(scene::detail::parse_real(b, line_no));
    }
    if (!(rate_per_pulse > 0.0))
      throw ConfigError("rate per pulse must be positive");
    const double scale = mechanics::calibrate_scale(commanded, measured);
    out << "points " << commanded.size() << "\n";
    out << "scale " << detail::fmt("%.6f", scale) << "\n";
    out << "systematic_scale_error " << detail::fmt("%.6f", scale - 1.0)
        << "\n";
    out << "corrected_rate_per_pulse "
        << detail::fmt("%.6f", rate_per_pulse * scale) << "\n";
  });
}

struct MatchOptions {
  int shift_px = 0;
  int search_px = 8;
  int window_px = 7;
  double baseline_mm = 100.0;
  double focal_px = 0.0; // 0: 60 degree field of view for the image width
  std::string out_dir = ".";
};

/// Match a stored pair; writes disparity.pgm (x256) and depth.pgm (mm).
inline int cmd_match(const std::string &left_path,
                     const std::string &right_path, const MatchOptions &opt,
                     std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto left = pgm::to_image(pgm::decode(io::read_file(left_path)));
    const auto right = pgm::to_image(pgm::decode(io::read_file(right_path)));
    if (left.width() != right.width() || left.height() != right.height())
      throw ValidationError("left and right images differ in size");

    vision::MatchParams params;
    params.window_px = opt.window_px;
    params.search_range_px = opt.search_px;
    geometry::CameraIntrinsics cam{
        opt.focal_px > 0.0
            ? opt.focal_px
            : geometry::focal_for_fov(left.width(), config::kDefaultHfovDeg),
        left.width(), left.height()};

    const auto disp =
        vision::match_correlation(left, right, opt.shift_px, params);
    const auto depth =
        vision::depth_map_from_disparity(disp, opt.baseline_mm, cam);

    detail::ensure_dir(opt.out_dir);
    io::write_file(detail::join(opt.out_dir, "disparity.pgm"),
                   pgm::encode(pgm::fixed_point16(disp.disparity, 256.0)));
    io::write_file(detail::join(opt.out_dir, "depth.pgm"),
                   pgm::encode(pgm::fixed_point16(depth.depth_mm, 1.0)));

    std::size_t textured = 0;
    double sum = 0.0;
    for (int y = 0; y < left.height(); ++y)
      for (int x = 0; x < left.width(); ++x) {
        if (vision::is_textured(left, x, y, params))
          ++textured;
        if (has_value(disp.disparity(x, y)))
          sum += disp.disparity(x, y);
      }
    std::string manifest =
        "left = " + left_path + "\nright = " + right_path +
        "\nshift = " + std::to_string(opt.shift_px) +
        "\nsearch = " + std::to_string(opt.search_px) +
        "\nwindow = " + std::to_string(opt.window_px) +
        "\nbaseline_mm = " + detail::fmt("%.17g", opt.baseline_mm) +
        "\nfocal_px = " + detail::fmt("%.17g", cam.focal_px) +
        "\nmin_score = " + detail::fmt("%.17g", params.min_score) +
        "\nmin_texture = " + detail::fmt("%.17g", params.min_texture) + "\n";
    io::write_file(detail::join(opt.out_dir, "manifest.txt"), manifest);

    const double fraction =
        textured ? static_cast<double>(disp.matched) / textured : 0.0;
    const double mean = disp.matched ? sum / disp.matched : 0.0;
    out << "matched_pixels " << disp.matched << " textured_pixels " << textured
        << " matched_fraction " << detail::fmt("%.6f", fraction)
        << " mean_disparity " << detail::fmt("%.6f", mean) << "\n";
  });
}

} // namespace stereorig::commands
