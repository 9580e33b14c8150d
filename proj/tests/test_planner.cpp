#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "stereorig/config.hpp"
#include "stereorig/planner.hpp"

using namespace stereorig;
using namespace stereorig::planner;

namespace {

const geometry::CameraIntrinsics kCam{800.0, 640, 480};

ScanSettings sixty_degree_settings() {
  ScanSettings s;
  s.intrinsics = {geometry::focal_for_fov(320, 60.0), 320, 240};
  return s;
}

double angular_gap(double from, double to) {
  double g = std::fmod(to - from, 360.0);
  return g < 0 ? g + 360.0 : g;
}

} // namespace

TEST(BaselineSetpoint, Modes) {
  CapturePolicy ratio{PolicyMode::TargetRatio, 0.05, 0.3, {}};
  EXPECT_DOUBLE_EQ(baseline_setpoint({2000.0, 5.0}, ratio, kCam, 77.0).setpoint_mm,
                   100.0);
  CapturePolicy disp{PolicyMode::TargetDisparity, 40.0, 0.3, {}};
  const auto sp = baseline_setpoint({2000.0, 5.0}, disp, kCam, 77.0);
  EXPECT_DOUBLE_EQ(sp.setpoint_mm, 100.0);
  EXPECT_DOUBLE_EQ(geometry::parallax_px(2000.0, sp.setpoint_mm, kCam), 40.0);
  EXPECT_FALSE(sp.clamped);
}

TEST(BaselineSetpoint, ClampsAndHolds) {
  CapturePolicy ratio{PolicyMode::TargetRatio, 0.5, 0.3, {30.0, 300.0}};
  const auto sp = baseline_setpoint({2000.0, 5.0}, ratio, kCam, 77.0);
  EXPECT_DOUBLE_EQ(sp.setpoint_mm, 300.0);
  EXPECT_DOUBLE_EQ(sp.requested_mm, 1000.0);
  EXPECT_TRUE(sp.clamped);
  const auto held = baseline_setpoint({std::nullopt, 5.0}, ratio, kCam, 77.0);
  EXPECT_DOUBLE_EQ(held.setpoint_mm, 77.0);
  EXPECT_FALSE(held.clamped);
}

TEST(RotationSchedule, Examples) {
  auto s = rotation_schedule(60.0, 0.3);
  ASSERT_EQ(s.size(), 9u);
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    EXPECT_NEAR(s[i], 42.0, 1e-12);
  EXPECT_NEAR(s.back(), 24.0, 1e-9);

  s = rotation_schedule(90.0, 0.0);
  ASSERT_EQ(s.size(), 4u);
  for (double v : s)
    EXPECT_DOUBLE_EQ(v, 90.0);

  s = rotation_schedule(60.0, 0.9);
  EXPECT_EQ(s.size(), 60u);
  EXPECT_NEAR(s[0], 6.0, 1e-9);
  EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 360.0, 1e-9);
}

TEST(RotationSchedule, Errors) {
  EXPECT_THROW(rotation_schedule(0.0, 0.3), DomainError);
  EXPECT_THROW(rotation_schedule(180.0, 0.3), DomainError);
  EXPECT_THROW(rotation_schedule(60.0, 1.0), DomainError);
  EXPECT_THROW(rotation_schedule(60.0, -0.1), DomainError);
}

TEST(RotationSchedule, SumsToTurnAndClosingStepIsNoLarger) {
  for (double fov = 5.0; fov < 179.0; fov += 3.7)
    for (double o = 0.0; o < 0.95; o += 0.15) {
      const auto s = rotation_schedule(fov, o);
      EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 360.0, 1e-9);
      EXPECT_GT(s.back(), 0.0);
      EXPECT_LE(s.back(), s.front() + 1e-9);
      EXPECT_GE(s.size(), static_cast<std::size_t>(std::ceil(360.0 / fov - 1e-9)));
    }
}

TEST(Controller, TransitionTable) {
  const auto scene = scene::load_scene("p 0 0 2000 0.8");
  ScanController ctl(sixty_degree_settings());
  EXPECT_EQ(ctl.state(), ScanState::Idle);
  mechanics::RigState rig;

  auto r = step(ctl, rig, scene);
  EXPECT_EQ(r.controller.state(), ScanState::AdjustBaseline);
  EXPECT_FALSE(r.capture);

  r = step(r.controller, r.rig, scene);
  EXPECT_EQ(r.controller.state(), ScanState::Capture);
  EXPECT_FALSE(r.capture);
  // TargetDisparity 16 px at 2000 mm with f = 277.1 -> 115.5 mm -> 115 mm.
  EXPECT_LE(std::abs(r.rig.baseline_mm - 16.0 * 2000.0 / geometry::focal_for_fov(320, 60.0)),
            2.5);

  r = step(r.controller, r.rig, scene);
  EXPECT_EQ(r.controller.state(), ScanState::Rotate);
  ASSERT_TRUE(r.capture);
  EXPECT_EQ(r.capture->info.heading_deg, r.rig.heading_deg);
  EXPECT_EQ(r.capture->info.baseline_mm, r.rig.baseline_mm);
  ASSERT_TRUE(r.capture->info.range_mm);
  EXPECT_DOUBLE_EQ(*r.capture->info.range_mm, 2000.0);

  r = step(r.controller, r.rig, scene);
  EXPECT_EQ(r.controller.state(), ScanState::Ranging);
  EXPECT_DOUBLE_EQ(r.rig.heading_deg, 40.0); // 42 deg -> 8 pulses
}

TEST(Controller, DoneIsAbsorbing) {
  const auto scene = scene::load_scene("p 0 0 2000 0.8");
  ScanController ctl(sixty_degree_settings());
  mechanics::RigState rig;
  std::size_t captures = 0;
  while (ctl.state() != ScanState::Done) {
    auto r = step(ctl, rig, scene);
    ctl = r.controller;
    rig = r.rig;
    captures += r.capture.has_value();
  }
  EXPECT_EQ(captures, 9u);
  EXPECT_THROW(step(ctl, rig, scene), StateError);
}

TEST(RunScan, OnePointScene) {
  const auto scene = scene::load_scene("p 0 0 2000 0.8");
  const auto res = run_scan(scene, sixty_degree_settings(), {});
  ASSERT_EQ(res.captures.size(), 9u);
  ASSERT_EQ(res.shot_log.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(res.shot_log[i].target_heading_deg, 42.0 * i, 1e-9);
    EXPECT_LE(std::abs(res.shot_log[i].heading_deg - 42.0 * i), 2.5 + 1e-9);
    EXPECT_EQ(res.captures[i].info.shot_index, i);
  }
  EXPECT_GE(res.final_rig.cumulative_rotation_deg, 360.0);
}

TEST(RunScan, BlindScanHoldsBaseline) {
  // Everything behind the rig at heading 0 and far outside the cone later.
  const auto scene = scene::load_scene("p 0 -50000 10 0.5");
  mechanics::RigState rig;
  rig.baseline_mm = 85.0;
  const auto res = run_scan(scene, sixty_degree_settings(), rig);
  ASSERT_EQ(res.captures.size(), 9u);
  for (const auto &s : res.shot_log) {
    EXPECT_FALSE(s.range_mm);
    EXPECT_DOUBLE_EQ(s.baseline_mm, 85.0);
    EXPECT_DOUBLE_EQ(s.setpoint_mm, 85.0);
  }
}

TEST(RunScan, Deterministic) {
  const auto scene = scene::load_scene("room 4000 3000 2500 300 seed 42");
  auto settings = sixty_degree_settings();
  settings.range_noise_std_mm = 20.0;
  settings.calibration.noise_std = 0.4;
  settings.with_error = true;
  const auto a = run_scan(scene, settings, {});
  const auto b = run_scan(scene, settings, {});
  ASSERT_EQ(a.captures.size(), b.captures.size());
  for (std::size_t i = 0; i < a.captures.size(); ++i) {
    EXPECT_EQ(format_shot(a.shot_log[i]), format_shot(b.shot_log[i]));
    EXPECT_TRUE(bitwise_equal(a.captures[i].left, b.captures[i].left));
    EXPECT_TRUE(bitwise_equal(a.captures[i].right, b.captures[i].right));
  }
}

TEST(RunScan, TerminationBoundAcrossPolicies) {
  const auto scene = scene::load_scene("room 4000 3000 2500 200 seed 8");
  for (double overlap : {0.0, 0.3, 0.6, 0.9})
    for (bool with_error : {false, true})
      for (double e : {0.03, -0.03}) {
        auto st = sixty_degree_settings();
        st.policy.overlap_fraction = overlap;
        st.with_error = with_error;
        st.calibration.systematic_scale_error = e;
        const auto res = run_scan(scene, st, {});
        EXPECT_EQ(res.captures.size(), res.schedule.size());
        const double rate = st.calibration.rotation_deg_per_pulse;
        const double cum = res.final_rig.cumulative_rotation_deg;
        EXPECT_GE(cum, 360.0 - 1e-9);
        // Half a pulse of rounding, one closing pulse, and the scale error
        // accumulated over the closing step.
        const double fov = geometry::horizontal_fov_deg(st.intrinsics);
        const double slack = with_error ? std::abs(e) : 0.0;
        EXPECT_LE(cum, 360.0 + 1.5 * rate * (1.0 + slack) + slack * fov + 1e-9);
        for (std::size_t i = 1; i < res.shot_log.size(); ++i)
          EXPECT_GT(res.shot_log[i].cumulative_deg,
                    res.shot_log[i - 1].cumulative_deg);
      }
}

TEST(RunScan, BaselineTracksSetpointWithinHalfPulse) {
  const auto scene = scene::load_scene("room 4000 3000 2500 300 seed 42");
  auto st = sixty_degree_settings();
  st.with_error = false;
  const auto res = run_scan(scene, st, {});
  for (const auto &s : res.shot_log)
    if (!s.saturated) {
      EXPECT_LE(std::abs(s.baseline_mm - s.setpoint_mm),
                st.calibration.baseline_mm_per_pulse / 2 + 1e-9);
    }
}

TEST(RunScan, UnitRatioSaturates) {
  const auto scene = scene::load_scene("room 4000 3000 2500 300 seed 42");
  auto st = sixty_degree_settings();
  st.policy = {PolicyMode::TargetRatio, 1.0, 0.3, {30.0, 300.0}};
  const auto res = run_scan(scene, st, {});
  bool any = false;
  for (const auto &s : res.shot_log)
    if (s.range_mm) {
      any = true;
      EXPECT_TRUE(s.saturated);
      EXPECT_DOUBLE_EQ(s.baseline_mm, 300.0);
      EXPECT_GT(s.requested_mm, s.setpoint_mm);
    }
  EXPECT_TRUE(any);
}

TEST(RunScan, CoverageFromShotLog) {
  const auto scene = scene::load_scene("p 0 0 2000 0.8");
  auto st = sixty_degree_settings();
  const double fov = geometry::horizontal_fov_deg(st.intrinsics);
  const auto res = run_scan(scene, st, {});
  const auto &log = res.shot_log;
  // Every azimuth is seen at least once.
  for (double az = 0.0; az < 360.0; az += 0.25) {
    int seen = 0;
    for (const auto &s : log)
      if (std::abs(std::remainder(az - s.heading_deg, 360.0)) <= fov / 2)
        ++seen;
    EXPECT_GE(seen, 1) << az;
  }
  // Neighbouring views, wraparound included, still share at least the
  // scheduled overlap less one rotation pulse of quantization.
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double gap =
        angular_gap(log[i].heading_deg, log[(i + 1) % log.size()].heading_deg);
    EXPECT_GE(fov - gap,
              st.policy.overlap_fraction * fov - st.calibration.rotation_deg_per_pulse);
  }
}

TEST(RunScan, RejectsStepFinerThanPulse) {
  auto st = sixty_degree_settings();
  st.policy.overlap_fraction = 0.9;
  st.calibration.rotation_deg_per_pulse = 10.0;
  EXPECT_THROW(ScanController{st}, DomainError);
}

TEST(ShotLog, Format) {
  ShotRecord r;
  r.index = 3;
  r.heading_deg = 125.0;
  r.baseline_mm = 115.0;
  r.range_mm = 2010.5;
  r.setpoint_mm = 116.09;
  EXPECT_EQ(format_shot(r),
            "shot 3 heading_deg 125.000 baseline_mm 115.000 range_mm 2010.500 "
            "setpoint_mm 116.090 saturated 0");
  r.range_mm.reset();
  r.saturated = true;
  EXPECT_NE(format_shot(r).find("range_mm none"), std::string::npos);
  EXPECT_NE(format_shot(r).find("saturated 1"), std::string::npos);
}
