#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "stereorig/errors.hpp"
#include "stereorig/random.hpp"

// Actuation model of the rig: PWM pulse trains drive the baseline slide and
// the rotating base. Motion per pulse is instantaneous in simulation.

namespace stereorig::mechanics {

/// Per-axis actuation constants. Defaults are the prototype's measured values:
/// a 1333 Hz, 33 % duty pulse train moving the slide 5 mm and the base 5 deg
/// per pulse, with a 3 % systematic print error on actuated motion.
struct ActuationCalibration {
  double baseline_mm_per_pulse = 5.0;
  double rotation_deg_per_pulse = 5.0;
  double pwm_freq_hz = 1333.0;
  double pwm_duty = 0.33;
  double systematic_scale_error = 0.03;
  // Std-dev of additive Gaussian motion noise per command, in axis units.
  double noise_std = 0.0;

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(baseline_mm_per_pulse) || !positive(rotation_deg_per_pulse) ||
        !positive(pwm_freq_hz))
      throw DomainError("actuation rates must be strictly positive");
    if (!(pwm_duty > 0.0 && pwm_duty < 1.0))
      throw DomainError("pwm duty must lie strictly between 0 and 1");
    if (!(std::abs(systematic_scale_error) < 0.5))
      throw DomainError("systematic scale error must satisfy |e| < 0.5");
    if (!(std::isfinite(noise_std) && noise_std >= 0.0))
      throw DomainError("noise std must be nonnegative");
  }
};

enum class Axis { Baseline, Rotation };

// Open/Close apply to the baseline axis, Cw/Ccw to the rotation axis.
enum class Direction { Open, Close, Cw, Ccw };

struct PwmCommand {
  Axis axis = Axis::Baseline;
  Direction direction = Direction::Open;
  std::int64_t pulse_count = 0;
  double freq_hz = 0.0;
  double duty = 0.0;

  double sign() const noexcept {
    return (direction == Direction::Open || direction == Direction::Cw) ? 1.0
                                                                        : -1.0;
  }
};

template <typename Cmd> struct Plan {
  Cmd command;
  double residual = 0.0; // requested minus actuated, axis units
};

using PulsePlan = Plan<PwmCommand>;

struct BaselineLimits {
  double min_mm = 30.0;
  double max_mm = 300.0;
};

struct RigState {
  double baseline_mm = 100.0;
  double heading_deg = 0.0;
  double cumulative_rotation_deg = 0.0;
  BaselineLimits limits;
  // Set when the last baseline command hit a travel limit.
  bool saturated = false;
  double saturation_mm = 0.0; // requested travel that was clamped away

  void validate() const {
    if (!(limits.min_mm > 0.0 && limits.min_mm <= limits.max_mm &&
          std::isfinite(limits.max_mm)))
      throw DomainError("baseline limits must satisfy 0 < min <= max");
    if (!(baseline_mm >= limits.min_mm && baseline_mm <= limits.max_mm))
      throw DomainError("baseline outside its travel limits");
    if (!(heading_deg >= 0.0 && heading_deg < 360.0))
      throw DomainError("heading must lie in [0, 360)");
    if (!(cumulative_rotation_deg >= 0.0))
      throw DomainError("cumulative rotation must be nonnegative");
  }
};

inline double wrap_degrees(double deg) noexcept {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0)
    h += 360.0;
  if (h >= 360.0)
    h = 0.0;
  return h;
}

/// Nearest pulse count for |magnitude|, ties away from zero. The fix-ups make
/// the half-pulse residual bound hold even when magnitude / rate rounds.
inline std::int64_t quantize_pulses(double magnitude, double rate) {
  if (!std::isfinite(magnitude))
    throw DomainError("requested motion must be finite");
  magnitude = std::abs(magnitude);
  std::int64_t n = std::llround(magnitude / rate);
  const double half = 0.5 * rate;
  if (magnitude - static_cast<double>(n) * rate >= half)
    ++n;
  else if (n > 0 && static_cast<double>(n) * rate - magnitude > half)
    --n;
  return n;
}

namespace detail {
inline PwmCommand make_command(Axis axis, Direction dir, std::int64_t n,
                               const ActuationCalibration &cal) {
  return PwmCommand{axis, dir, n, cal.pwm_freq_hz, cal.pwm_duty};
}
} // namespace detail

inline PulsePlan pulses_for_baseline_delta(double delta_mm,
                                           const ActuationCalibration &cal) {
  cal.validate();
  const double rate = cal.baseline_mm_per_pulse;
  const std::int64_t n = quantize_pulses(delta_mm, rate);
  const Direction dir = delta_mm > 0.0 ? Direction::Open : Direction::Close;
  PulsePlan plan{detail::make_command(Axis::Baseline, dir, n, cal), 0.0};
  plan.residual = delta_mm - plan.command.sign() * static_cast<double>(n) * rate;
  return plan;
}

inline PulsePlan pulses_for_rotation(double delta_deg,
                                     const ActuationCalibration &cal) {
  cal.validate();
  if (!(delta_deg > 0.0 && delta_deg <= 360.0))
    throw DomainError("rotation increment must lie in (0, 360] degrees");
  const double rate = cal.rotation_deg_per_pulse;
  const std::int64_t n = quantize_pulses(delta_deg, rate);
  PulsePlan plan{detail::make_command(Axis::Rotation, Direction::Cw, n, cal),
                 0.0};
  plan.residual = delta_deg - static_cast<double>(n) * rate;
  return plan;
}

struct PwmTiming {
  double total_duration_s = 0.0;
  double total_on_time_s = 0.0;
};

inline PwmTiming pwm_timing(const PwmCommand &cmd) {
  if (!(cmd.freq_hz > 0.0))
    throw DomainError("pwm frequency must be positive");
  const double duration = static_cast<double>(cmd.pulse_count) / cmd.freq_hz;
  return {duration, cmd.duty * duration};
}

/// Advance the rig by one command. Baseline travel clamps at the limits and
/// reports the clamped amount through `saturated` / `saturation_mm`.
/// Rotation adds its swept magnitude to `cumulative_rotation_deg`.
inline RigState apply_command(RigState state, const PwmCommand &cmd,
                              const ActuationCalibration &cal, bool with_error,
                              Xorshift64Star *noise = nullptr) {
  const double rate = cmd.axis == Axis::Baseline ? cal.baseline_mm_per_pulse
                                                 : cal.rotation_deg_per_pulse;
  double motion = static_cast<double>(cmd.pulse_count) * rate;
  if (with_error)
    motion *= 1.0 + cal.systematic_scale_error;
  if (noise != nullptr && cal.noise_std > 0.0 && cmd.pulse_count > 0)
    motion = std::max(0.0, motion + cal.noise_std * noise->normal());
  const double displacement = cmd.sign() * motion;

  if (cmd.axis == Axis::Baseline) {
    const double target = state.baseline_mm + displacement;
    const double clamped =
        std::clamp(target, state.limits.min_mm, state.limits.max_mm);
    state.saturated = clamped != target;
    state.saturation_mm = target - clamped;
    state.baseline_mm = clamped;
  } else {
    state.cumulative_rotation_deg += motion;
    state.heading_deg = wrap_degrees(state.heading_deg + displacement);
  }
  return state;
}

inline bool full_turn_done(const RigState &state) noexcept {
  return state.cumulative_rotation_deg >= 360.0 - 1e-9;
}

/// Least-squares scale through the origin, sum(c m) / sum(c^2).
inline double calibrate_scale(std::span<const double> commanded,
                              std::span<const double> measured) {
  if (commanded.size() != measured.size())
    throw CalibrationError("commanded and measured lists differ in length");
  if (commanded.size() < 2)
    throw CalibrationError("at least two calibration points are required");
  double cm = 0.0;
  double cc = 0.0;
  for (std::size_t i = 0; i < commanded.size(); ++i) {
    if (!std::isfinite(commanded[i]) || !std::isfinite(measured[i]))
      throw CalibrationError("calibration data must be finite");
    cm += commanded[i] * measured[i];
    cc += commanded[i] * commanded[i];
  }
  if (cc == 0.0)
    throw CalibrationError("all commanded displacements are zero");
  return cm / cc;
}

} // namespace stereorig::mechanics
