#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <algorithm>
#include <string>
#include <vector>

#include "stereorig/errors.hpp"
#include "stereorig/geometry.hpp"
#include "stereorig/mechanics.hpp"
#include "stereorig/random.hpp"
#include "stereorig/scene.hpp"

namespace stereorig::planner {

using geometry::CameraIntrinsics;
using mechanics::ActuationCalibration;
using mechanics::BaselineLimits;
using mechanics::RigState;

enum class PolicyMode { TargetRatio, TargetDisparity };

/// How the baseline follows the measured range, and how much consecutive
/// views overlap.
struct CapturePolicy {
  PolicyMode mode = PolicyMode::TargetDisparity;
  double target = 16.0; // ratio r, or disparity in px
  double overlap_fraction = 0.3;
  BaselineLimits limits;

  void validate() const {
    if (!(std::isfinite(target) && target > 0.0))
      throw DomainError("policy target must be positive");
    if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.9))
      throw DomainError("overlap fraction must lie in [0, 0.9]");
    if (!(limits.min_mm > 0.0 && limits.min_mm <= limits.max_mm &&
          std::isfinite(limits.max_mm)))
      throw DomainError("baseline limits must satisfy 0 < min <= max");
  }
};

struct Setpoint {
  double requested_mm = 0.0; // before clamping
  double setpoint_mm = 0.0;  // clamped to the travel limits
  bool clamped = false;
};

/// Baseline the rig should open or lock to for the measured range. With no
/// return the current baseline is held.
inline Setpoint baseline_setpoint(const scene::RangeReading &range,
                                  const CapturePolicy &policy,
                                  const CameraIntrinsics &cam,
                                  double current_baseline_mm) {
  policy.validate();
  if (!range.has_return())
    return {current_baseline_mm, current_baseline_mm, false};
  const double z = *range.distance_mm;
  const double a = policy.mode == PolicyMode::TargetRatio
                       ? policy.target * z
                       : policy.target * z / cam.focal_px;
  const double c = std::clamp(a, policy.limits.min_mm, policy.limits.max_mm);
  return {a, c, c != a};
}

/// Heading increments for one full turn: count - 1 steps of
/// fov (1 - overlap), then one closing step that lands on 360.
inline std::vector<double> rotation_schedule(double fov_deg,
                                             double overlap_fraction) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    throw DomainError("field of view must lie in (0, 180) degrees");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw DomainError("overlap fraction must lie in [0, 1)");
  const double step = fov_deg * (1.0 - overlap_fraction);
  // 1e-9 absorbs representation error, e.g. 60 * (1 - 0.9) < 6.
  const auto count =
      static_cast<std::size_t>(std::ceil(360.0 / step - 1e-9));
  std::vector<double> inc(count, step);
  inc.back() = 360.0 - static_cast<double>(count - 1) * step;
  return inc;
}

struct ScanSettings {
  CapturePolicy policy;
  ActuationCalibration calibration;
  CameraIntrinsics intrinsics;
  bool with_error = false;
  double cone_half_angle_deg = 15.0;
  double range_noise_std_mm = 0.0;
  double blob_radius_px = 3.0;
  std::uint64_t seed = 1;
};

enum class ScanState { Idle, Ranging, AdjustBaseline, Capture, Rotate, Done };

inline const char *to_string(ScanState s) noexcept {
  switch (s) {
  case ScanState::Idle: return "Idle";
  case ScanState::Ranging: return "Ranging";
  case ScanState::AdjustBaseline: return "AdjustBaseline";
  case ScanState::Capture: return "Capture";
  case ScanState::Rotate: return "Rotate";
  case ScanState::Done: return "Done";
  }
  return "?";
}

struct ShotRecord {
  std::size_t index = 0;
  double heading_deg = 0.0;
  double cumulative_deg = 0.0;
  double target_heading_deg = 0.0; // scheduled, before quantization
  double baseline_mm = 0.0;
  std::optional<double> range_mm;
  double setpoint_mm = 0.0;
  double requested_mm = 0.0;
  bool saturated = false;
};

/// `shot <i> heading_deg <h> baseline_mm <a> range_mm <z|none>
///  setpoint_mm <s> saturated <0|1>`
inline std::string format_shot(const ShotRecord &s) {
  char range[32] = "none";
  if (s.range_mm)
    std::snprintf(range, sizeof range, "%.3f", *s.range_mm);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "shot %zu heading_deg %.3f baseline_mm %.3f range_mm %s "
                "setpoint_mm %.3f saturated %d",
                s.index, s.heading_deg, s.baseline_mm, range, s.setpoint_mm,
                s.saturated ? 1 : 0);
  return buf;
}

struct StepResult;

/// Single-owner scan state machine:
/// Idle -> (Ranging -> AdjustBaseline -> Capture -> Rotate)* -> Done.
/// Stepping Idle performs the first ranging.
class ScanController {
public:
  explicit ScanController(ScanSettings settings)
      : settings_(std::move(settings)), rng_(settings_.seed) {
    settings_.policy.validate();
    settings_.calibration.validate();
    settings_.intrinsics.validate();
    const double fov = geometry::horizontal_fov_deg(settings_.intrinsics);
    schedule_ = rotation_schedule(fov, settings_.policy.overlap_fraction);
    if (fov * (1.0 - settings_.policy.overlap_fraction) <
        settings_.calibration.rotation_deg_per_pulse)
      throw DomainError(
          "heading step is finer than one rotation pulse; lower the overlap");
  }

  ScanState state() const noexcept { return state_; }
  const std::vector<ShotRecord> &shot_log() const noexcept { return log_; }
  const std::vector<double> &schedule() const noexcept { return schedule_; }
  const ScanSettings &settings() const noexcept { return settings_; }
  /// Wall-clock PWM time of every command issued so far.
  double actuation_time_s() const noexcept { return actuation_s_; }

  double target_heading(std::size_t k) const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < k && i < schedule_.size(); ++i)
      t += schedule_[i];
    return t;
  }

private:
  friend StepResult step(ScanController c, RigState rig,
                         const scene::Scene &scene);

  ScanSettings settings_;
  ScanState state_ = ScanState::Idle;
  std::vector<double> schedule_;
  std::size_t next_increment_ = 0;
  std::vector<ShotRecord> log_;
  double actuation_s_ = 0.0;
  scene::RangeReading range_;
  Setpoint setpoint_;
  bool saturated_ = false;
  Xorshift64Star rng_;
};

struct StepResult {
  ScanController controller;
  RigState rig;
  std::optional<scene::StereoPair> capture;
};

/// Execute one state's work and return the successor controller and rig.
inline StepResult step(ScanController c, RigState rig,
                       const scene::Scene &scene) {
  const auto &st = c.settings_;
  const auto &cal = st.calibration;
  std::optional<scene::StereoPair> capture;

  switch (c.state_) {
  case ScanState::Done:
    throw StateError("scan already finished");

  case ScanState::Idle:
  case ScanState::Ranging:
    c.range_ = scene::range_reading(scene, {rig.heading_deg},
                                    st.cone_half_angle_deg,
                                    st.range_noise_std_mm, &c.rng_);
    c.state_ = ScanState::AdjustBaseline;
    break;

  case ScanState::AdjustBaseline: {
    c.setpoint_ =
        baseline_setpoint(c.range_, st.policy, st.intrinsics, rig.baseline_mm);
    const auto plan = mechanics::pulses_for_baseline_delta(
        c.setpoint_.setpoint_mm - rig.baseline_mm, cal);
    rig = mechanics::apply_command(rig, plan.command, cal, st.with_error,
                                   &c.rng_);
    c.actuation_s_ += mechanics::pwm_timing(plan.command).total_duration_s;
    c.saturated_ = c.setpoint_.clamped || rig.saturated;
    c.state_ = ScanState::Capture;
    break;
  }

  case ScanState::Capture: {
    auto pair = scene::render_stereo_pair(scene, {rig.heading_deg},
                                          rig.baseline_mm, st.intrinsics,
                                          st.blob_radius_px);
    ShotRecord rec;
    rec.index = c.log_.size();
    rec.heading_deg = rig.heading_deg;
    rec.cumulative_deg = rig.cumulative_rotation_deg;
    rec.target_heading_deg = c.target_heading(c.next_increment_);
    rec.baseline_mm = rig.baseline_mm;
    rec.range_mm = c.range_.distance_mm;
    rec.setpoint_mm = c.setpoint_.setpoint_mm;
    rec.requested_mm = c.setpoint_.requested_mm;
    rec.saturated = c.saturated_;
    pair.info.shot_index = rec.index;
    pair.info.range_mm = rec.range_mm;
    c.log_.push_back(rec);
    capture = std::move(pair);
    c.state_ = ScanState::Rotate;
    break;
  }

  case ScanState::Rotate: {
    const std::size_t k = c.next_increment_++;
    const bool closing = k + 1 >= c.schedule_.size();
    const double target = closing ? 360.0 : c.target_heading(k + 1);
    const double delta = target - rig.cumulative_rotation_deg;
    if (delta > 0.0) {
      auto plan = mechanics::pulses_for_rotation(std::min(delta, 360.0), cal);
      // The closing step must reach a full turn on nominal rates.
      if (closing &&
          rig.cumulative_rotation_deg +
                  static_cast<double>(plan.command.pulse_count) *
                      cal.rotation_deg_per_pulse <
              360.0 - 1e-9)
        ++plan.command.pulse_count;
      rig = mechanics::apply_command(rig, plan.command, cal, st.with_error,
                                     &c.rng_);
      c.actuation_s_ += mechanics::pwm_timing(plan.command).total_duration_s;
    }
    if (closing) {
      // Top up when a negative scale error left the turn short.
      mechanics::PwmCommand one{mechanics::Axis::Rotation,
                                mechanics::Direction::Cw, 1, cal.pwm_freq_hz,
                                cal.pwm_duty};
      for (int guard = 0; !mechanics::full_turn_done(rig); ++guard) {
        if (guard > 1000)
          throw InvariantError("rotation cannot complete a full turn");
        rig = mechanics::apply_command(rig, one, cal, st.with_error, &c.rng_);
        c.actuation_s_ += mechanics::pwm_timing(one).total_duration_s;
      }
    }
    c.state_ =
        mechanics::full_turn_done(rig) ? ScanState::Done : ScanState::Ranging;
    break;
  }
  }
  return StepResult{std::move(c), rig, std::move(capture)};
}

struct ScanResult {
  std::vector<scene::StereoPair> captures;
  std::vector<ShotRecord> shot_log;
  RigState final_rig;
  std::vector<double> schedule;
  double actuation_time_s = 0.0;
};

inline ScanResult run_scan(const scene::Scene &scene,
                           const ScanSettings &settings,
                           const RigState &initial) {
  initial.validate();
  ScanController ctl(settings);
  RigState rig = initial;
  rig.limits = settings.policy.limits;
  rig.validate();
  ScanResult out;
  out.schedule = ctl.schedule();
  const std::size_t max_steps = 4 * ctl.schedule().size() + 4;
  for (std::size_t n = 0; ctl.state() != ScanState::Done; ++n) {
    if (n > max_steps)
      throw InvariantError("scan did not terminate");
    auto r = step(std::move(ctl), rig, scene);
    ctl = std::move(r.controller);
    rig = r.rig;
    if (r.capture)
      out.captures.push_back(std::move(*r.capture));
  }
  out.shot_log = ctl.shot_log();
  out.final_rig = rig;
  out.actuation_time_s = ctl.actuation_time_s();
  if (out.captures.size() != out.schedule.size())
    throw InvariantError("capture count differs from the rotation schedule");
  return out;
}

} // namespace stereorig::planner
