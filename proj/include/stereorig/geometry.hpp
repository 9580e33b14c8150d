#pragma once

#include <cmath>
#include <numbers>

#include "stereorig/errors.hpp"

// Twin-camera stereo geometry under the parallel-axis pinhole model.
// Units: millimeters for lengths, degrees for angles, pixels on the image.

namespace stereorig::geometry {

/// Shared intrinsics of both cameras. The principal point is the image
/// center, (width/2, height/2), with pixel centers at integer coordinates.
struct CameraIntrinsics {
  double focal_px = 0.0;
  int width_px = 0;
  int height_px = 0;

  double cx() const noexcept { return 0.5 * width_px; }
  double cy() const noexcept { return 0.5 * height_px; }

  void validate() const {
    if (!(std::isfinite(focal_px) && focal_px > 0.0))
      throw DomainError("focal_px must be positive and finite");
    if (width_px < 16 || height_px < 16)
      throw DomainError("image dimensions must be at least 16 px");
  }

  bool operator==(const CameraIntrinsics &) const = default;
};

/// Horizontal field of view in degrees: 2 atan(width / 2f).
inline double horizontal_fov_deg(const CameraIntrinsics &cam) {
  cam.validate();
  return 2.0 * std::atan(cam.width_px / (2.0 * cam.focal_px)) * 180.0 /
         std::numbers::pi;
}

/// Focal length that yields the given horizontal field of view.
inline double focal_for_fov(int width_px, double hfov_deg) {
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0))
    throw DomainError("field of view must lie in (0, 180) degrees");
  return 0.5 * width_px / std::tan(0.5 * hfov_deg * std::numbers::pi / 180.0);
}

namespace detail {
inline void require_positive(double v, const char *what) {
  if (!(std::isfinite(v) && v > 0.0))
    throw DomainError(std::string(what) + " must be positive and finite");
}
inline void require_nonnegative(double v, const char *what) {
  if (!(std::isfinite(v) && v >= 0.0))
    throw DomainError(std::string(what) + " must be nonnegative and finite");
}
} // namespace detail

/// Disparity in pixels of a point at depth `distance_mm`: f a / z.
inline double parallax_px(double distance_mm, double baseline_mm,
                          const CameraIntrinsics &cam) {
  detail::require_positive(distance_mm, "distance");
  detail::require_nonnegative(baseline_mm, "baseline");
  cam.validate();
  return cam.focal_px * baseline_mm / distance_mm;
}

/// Depth from disparity: f a / d. Throws AtInfinityError for d <= 0.
inline double triangulate_depth(double disparity_px, double baseline_mm,
                                const CameraIntrinsics &cam) {
  if (std::isnan(disparity_px) || disparity_px <= 0.0)
    throw AtInfinityError("disparity must be positive for a finite depth");
  if (!std::isfinite(disparity_px))
    throw DomainError("disparity must be finite");
  detail::require_positive(baseline_mm, "baseline");
  cam.validate();
  return cam.focal_px * baseline_mm / disparity_px;
}

/// Rendered depth/width ratio of a small cube, r = a / z.
inline double depth_width_ratio(double baseline_mm, double distance_mm) {
  detail::require_positive(distance_mm, "distance");
  detail::require_positive(baseline_mm, "baseline");
  return baseline_mm / distance_mm;
}

/// Depth change produced by a one-pixel disparity change: z^2 / (f a).
inline double depth_resolution_mm(double distance_mm, double baseline_mm,
                                  const CameraIntrinsics &cam) {
  detail::require_positive(distance_mm, "distance");
  detail::require_positive(baseline_mm, "baseline");
  cam.validate();
  return distance_mm * distance_mm / (cam.focal_px * baseline_mm);
}

struct CubeProbe {
  double side_mm = 0.0;
  double center_distance_mm = 0.0; // depth of the front face

  void validate() const {
    detail::require_positive(side_mm, "cube side");
    if (!(std::isfinite(center_distance_mm) && center_distance_mm > side_mm))
      throw DomainError("cube must lie fully in front of the camera plane");
  }
};

struct RatioReport {
  double ab_px = 0.0; // front-face width on screen
  double bc_px = 0.0; // depth interval on the overlapped screens
  double ratio = 0.0; // bc / ab
};

/// Screen intervals of a cube seen by the twin rig with overlapped panels.
///
/// The cube's front face spans x in [0, side] at depth z, its rear face sits
/// at z + side. AB is the front face width in the left panel. BC is the gap,
/// on the overlapped screens, between the front and rear edge after each is
/// projected through both cameras, i.e. the difference of their disparities.
/// Both intervals come from exact pinhole projection.
inline RatioReport screen_intervals(const CubeProbe &probe, double baseline_mm,
                                    const CameraIntrinsics &cam) {
  probe.validate();
  detail::require_nonnegative(baseline_mm, "baseline");
  cam.validate();

  const double f = cam.focal_px;
  const double half = 0.5 * baseline_mm;
  const double z_front = probe.center_distance_mm;
  const double z_back = z_front + probe.side_mm;
  const double x_edge = probe.side_mm;

  auto project = [&](double x, double z, double camera_x) {
    return cam.cx() + f * (x - camera_x) / z;
  };

  const double a_left = project(0.0, z_front, -half);
  const double b_left = project(x_edge, z_front, -half);
  const double b_right = project(x_edge, z_front, half);
  const double c_left = project(x_edge, z_back, -half);
  const double c_right = project(x_edge, z_back, half);

  RatioReport report;
  report.ab_px = b_left - a_left;
  report.bc_px = std::abs((b_left - b_right) - (c_left - c_right));
  report.ratio = report.bc_px / report.ab_px;
  return report;
}

} // namespace stereorig::geometry
